#include "stockloan/closedform.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>
#include <tuple>
#include <limits>

namespace stockloan {

double BoundaryLevel::value() const {
    if (!level_) throw UsageError("boundary is unbounded");
    return *level_;
}

double BoundaryLevel::value_or_inf() const noexcept {
    return level_ ? *level_ : std::numeric_limits<double>::infinity();
}

std::string BoundaryLevel::to_string() const {
    if (!level_) return "inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, *level_);
    return std::string(buf, res.ptr);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct D12 {
    double d1;
    double d2;
};

D12 d12(double spot, double tau, const MarketParams& m, double strike) {
    const double vol = m.sigma() * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + (m.r() - m.delta() + 0.5 * m.sigma() * m.sigma()) * tau) / vol;
    return {d1, d1 - vol};
}

void check_inputs(double spot, double tau, double strike) {
    if (!(spot >= 0.0)) throw DomainError("spot must be >= 0");
    if (!(tau >= 0.0)) throw DomainError("time to maturity must be >= 0");
    if (!(strike > 0.0)) throw DomainError("strike must be > 0");
}

}  // namespace

double european_call(double spot, double tau, const MarketParams& market, double strike) {
    check_inputs(spot, tau, strike);
    if (tau == 0.0) return std::max(spot - strike, 0.0);
    if (spot == 0.0) return 0.0;
    const auto [d1, d2] = d12(spot, tau, market, strike);
    return spot * std::exp(-market.delta() * tau) * normal_cdf(d1) -
           strike * std::exp(-market.r() * tau) * normal_cdf(d2);
}

double european_put(double spot, double tau, const MarketParams& market, double strike) {
    check_inputs(spot, tau, strike);
    if (tau == 0.0) return std::max(strike - spot, 0.0);
    if (spot == 0.0) return strike * std::exp(-market.r() * tau);
    const auto [d1, d2] = d12(spot, tau, market, strike);
    return strike * std::exp(-market.r() * tau) * normal_cdf(-d2) -
           spot * std::exp(-market.delta() * tau) * normal_cdf(-d1);
}

double parity_price_regime3(double spot, double tau, const MarketParams& market,
                            const LoanContract& contract) {
    if (market.r() < contract.loan_rate()) {
        throw UsageError("parity formula holds only for r >= loan rate; below that it is a lower bound");
    }
    if (!(tau >= 0.0 && tau <= contract.maturity())) throw DomainError("tau must lie in [0, T]");
    const double strike = contract.principal() * std::exp(contract.loan_rate() * contract.maturity());
    return european_call(spot, tau, market, strike) + (1.0 - std::exp(-market.delta() * tau)) * spot;
}

std::pair<double, double> characteristic_roots(double r_bar, double delta, double sigma) {
    const double s2 = sigma * sigma;
    const double shifted = r_bar - delta + 0.5 * s2;
    const double plus = (-(r_bar - delta - 0.5 * s2) + std::sqrt(shifted * shifted + 2.0 * delta * s2)) / s2;
    // α₋ from the sum of roots, avoiding a second radical.
    const double minus = 1.0 - 2.0 * (r_bar - delta) / s2 - plus;
    return {plus, minus};
}

double PerpetualResult::value(double x) const {
    if (x_star_inf.is_bounded() && x >= x_star_inf.value()) return x - principal;
    if (!c1) throw UsageError("perpetual value is only available when the boundary is bounded");
    return *c1 * std::pow(x, alpha_plus);
}

double PerpetualResult::slope(double x) const {
    if (x_star_inf.is_bounded() && x > x_star_inf.value()) return 1.0;
    if (!c1) throw UsageError("perpetual value is only available when the boundary is bounded");
    return *c1 * alpha_plus * std::pow(x, alpha_plus - 1.0);
}

namespace {

PerpetualResult perpetual_for(double r_bar, double delta, double sigma, double k) {
    PerpetualResult out;
    out.principal = k;
    std::tie(out.alpha_plus, out.alpha_minus) = characteristic_roots(r_bar, delta, sigma);
    const bool bounded = delta > 0.0 || r_bar < -0.5 * sigma * sigma;
    if (!bounded) return out;
    const double a = out.alpha_plus;
    out.x_star_inf = BoundaryLevel::at(a / (a - 1.0) * k);
    out.c1 = std::pow((a - 1.0) / (a * k), a - 1.0) / a;
    return out;
}

}  // namespace

PerpetualResult perpetual_regime1(const MarketParams& market, const LoanContract& contract) {
    const double r_bar = effective_rate(market, contract);
    if (r_bar >= 0.0 && market.delta() == 0.0) {
        throw UsageError("redemption region is empty (r >= loan rate, no dividend): no perpetual boundary");
    }
    return perpetual_for(r_bar, market.delta(), market.sigma(), contract.principal());
}

PerpetualResult perpetual_regime2(const MarketParams& market, const LoanContract& contract) {
    const double r_bar = effective_rate(market, contract);
    if (r_bar >= 0.0) {
        throw UsageError("redemption region is empty for reinvested dividends when r >= loan rate");
    }
    return perpetual_for(r_bar, 0.0, market.sigma(), contract.principal());
}

PerpetualRegime3 perpetual_regime3(const MarketParams& market, const LoanContract& contract) {
    if (!(market.delta() > 0.0)) throw UsageError("delivered-dividend perpetual requires delta > 0");
    if (!(market.r() < contract.loan_rate())) throw UsageError("delivered-dividend perpetual requires r < loan rate");
    return {};
}

TerminalLimit terminal_limit(DividendRegime regime, const MarketParams& market,
                             const LoanContract& contract, double scaled_accrued) {
    const double k = contract.principal();
    const double r_bar = effective_rate(market, contract);
    const auto cls = classify(market, contract.with_regime(regime));
    if (!cls.has_redemption_boundary()) {
        throw UsageError("terminal boundary limit is undefined: redemption region is empty");
    }
    switch (regime) {
    case DividendRegime::LenderKeeps:
    case DividendRegime::DeliveredImmediately:
        if (r_bar >= 0.0) return {std::max(k, r_bar * k / market.delta())};
        return {k};
    case DividendRegime::ReinvestedReturnedOnRedemption:
        return {k};
    case DividendRegime::CashReturnedOnRedemption:
        if (scaled_accrued < 0.0) throw DomainError("scaled accrued dividends must be >= 0");
        return {k - scaled_accrued};
    }
    throw UsageError("unknown dividend regime");
}

}  // namespace stockloan
