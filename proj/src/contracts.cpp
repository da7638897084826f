#include "stockloan/contracts.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stockloan {

std::string_view to_string(DividendRegime regime) {
    switch (regime) {
    case DividendRegime::LenderKeeps: return "lender-keeps";
    case DividendRegime::ReinvestedReturnedOnRedemption: return "reinvested-returned-on-redemption";
    case DividendRegime::DeliveredImmediately: return "delivered-immediately";
    case DividendRegime::CashReturnedOnRedemption: return "cash-returned-on-redemption";
    }
    return "unknown";
}

int regime_number(DividendRegime regime) { return static_cast<int>(regime); }

DividendRegime regime_from_number(int n) {
    if (n < 1 || n > 4) {
        throw UsageError("dividend regime must be 1..4, got " + std::to_string(n));
    }
    return static_cast<DividendRegime>(n);
}

MarketParams::MarketParams(double r, double delta, double sigma)
    : r_(r), delta_(delta), sigma_(sigma) {
    if (!(std::isfinite(r) && r > 0.0)) throw UsageError("riskless rate r must be > 0");
    if (!(std::isfinite(delta) && delta >= 0.0)) throw UsageError("dividend yield must be >= 0");
    if (!(std::isfinite(sigma) && sigma > 0.0)) throw UsageError("volatility must be > 0");
}

LoanContract::LoanContract(double principal, double loan_rate, double maturity, DividendRegime regime)
    : principal_(principal), loan_rate_(loan_rate), maturity_(maturity), regime_(regime) {
    if (!(std::isfinite(principal) && principal > 0.0)) throw UsageError("principal must be > 0");
    if (!std::isfinite(loan_rate)) throw UsageError("loan rate must be finite");
    if (!(std::isfinite(maturity) && maturity > 0.0)) throw UsageError("maturity must be > 0");
    (void)regime_number(regime);
}

double LoanContract::redemption_amount(double t) const {
    return principal_ * std::exp(loan_rate_ * t);
}

namespace {

void check_calendar(double s, double i, double t, const LoanContract& contract) {
    if (!(s >= 0.0)) throw DomainError("price must be >= 0");
    if (!(i >= 0.0)) throw DomainError("accrued dividends must be >= 0");
    if (!(t >= 0.0 && t <= contract.maturity())) throw DomainError("time must lie in [0, T]");
}

}  // namespace

SimilarityState to_similarity(double s, double i, double t, const LoanContract& contract) {
    check_calendar(s, i, t, contract);
    const double scale = std::exp(-contract.loan_rate() * t);
    return {s * scale, i * scale, contract.maturity() - t};
}

CalendarState from_similarity(const SimilarityState& state, const LoanContract& contract) {
    if (!(state.x >= 0.0)) throw DomainError("scaled price must be >= 0");
    if (!(state.a >= 0.0)) throw DomainError("scaled accrued dividends must be >= 0");
    if (!(state.tau >= 0.0 && state.tau <= contract.maturity())) {
        throw DomainError("time to maturity must lie in [0, T]");
    }
    const double t = contract.maturity() - state.tau;
    const double scale = std::exp(contract.loan_rate() * t);
    return {state.x * scale, state.a * scale, t};
}

double payoff(DividendRegime regime, double s, double i, double t, const LoanContract& contract) {
    check_calendar(s, i, t, contract);
    const double owed = contract.redemption_amount(t);
    switch (regime) {
    case DividendRegime::LenderKeeps:
    case DividendRegime::ReinvestedReturnedOnRedemption:
        return std::max(s - owed, 0.0);
    case DividendRegime::DeliveredImmediately:
        return std::max(s - owed, 0.0) + i;
    case DividendRegime::CashReturnedOnRedemption:
        return std::max(s + i - owed, 0.0);
    }
    throw UsageError("unknown dividend regime");
}

ReducedProblem reduce_regime2(const MarketParams& market, const LoanContract& contract) {
    if (contract.regime() != DividendRegime::ReinvestedReturnedOnRedemption) {
        throw UsageError("reduce_regime2 requires the reinvested-dividend regime");
    }
    return {market.with_delta(0.0), contract.with_regime(DividendRegime::LenderKeeps)};
}

std::string_view to_string(RegionKind kind) {
    switch (kind) {
    case RegionKind::Empty: return "empty";
    case RegionKind::NeverStrictlyOptimal: return "never-strictly-optimal";
    case RegionKind::BoundaryCurve: return "boundary-curve";
    case RegionKind::BoundarySurface: return "boundary-surface";
    }
    return "unknown";
}

std::string_view to_string(ClosedFormKind kind) {
    switch (kind) {
    case ClosedFormKind::EuropeanCallEquivalent: return "European-call equivalent";
    case ClosedFormKind::ParityFormula: return "parity formula";
    case ClosedFormKind::LinearPDE: return "linear PDE";
    }
    return "unknown";
}

RegimeClassification classify(const MarketParams& market, const LoanContract& contract) {
    const double r = market.r();
    const double gamma = contract.loan_rate();
    const bool no_dividend = market.delta() == 0.0;

    switch (contract.regime()) {
    case DividendRegime::LenderKeeps:
        if (r >= gamma && no_dividend) return {RegionKind::Empty, ClosedFormKind::EuropeanCallEquivalent};
        return {RegionKind::BoundaryCurve, std::nullopt};
    case DividendRegime::ReinvestedReturnedOnRedemption:
        if (r >= gamma) return {RegionKind::Empty, ClosedFormKind::EuropeanCallEquivalent};
        return {RegionKind::BoundaryCurve, std::nullopt};
    case DividendRegime::DeliveredImmediately:
        if (no_dividend) return classify(market, contract.with_regime(DividendRegime::LenderKeeps));
        if (r >= gamma) return {RegionKind::Empty, ClosedFormKind::ParityFormula};
        return {RegionKind::BoundaryCurve, std::nullopt};
    case DividendRegime::CashReturnedOnRedemption:
        if (r > gamma) return {RegionKind::Empty, ClosedFormKind::LinearPDE};
        if (r == gamma) return {RegionKind::NeverStrictlyOptimal, ClosedFormKind::LinearPDE};
        return {RegionKind::BoundarySurface, std::nullopt};
    }
    throw UsageError("unknown dividend regime");
}

}  // namespace stockloan
