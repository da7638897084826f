// Domain types for stock loans: market environment, contract terms, the four
// dividend-distribution regimes, payoffs and the similarity change of
// variables x = e^{-γt} S, A = e^{-γt} I, τ = T - t.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stockloan {

/// Caller asked for something the model does not define (wrong regime,
/// parameters outside a formula's validity range, unsupported solver).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric input outside the state space (negative price, τ > T, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A solver failed to produce a trustworthy answer.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, double worst_residual = 0.0)
        : std::runtime_error(what), worst_residual_(worst_residual) {}
    double worst_residual() const noexcept { return worst_residual_; }

private:
    double worst_residual_;
};

enum class DividendRegime {
    LenderKeeps = 1,                     // dividends go to the lender before redemption
    ReinvestedReturnedOnRedemption = 2,  // reinvested in the stock, returned on redemption
    DeliveredImmediately = 3,            // paid to the borrower as they accrue
    CashReturnedOnRedemption = 4,        // accumulated in cash, returned on redemption
};

std::string_view to_string(DividendRegime regime);
int regime_number(DividendRegime regime);
/// Accepts 1..4; anything else is a UsageError.
DividendRegime regime_from_number(int n);

class MarketParams {
public:
    /// r > 0, delta >= 0, sigma > 0.
    MarketParams(double r, double delta, double sigma);

    double r() const noexcept { return r_; }
    double delta() const noexcept { return delta_; }
    double sigma() const noexcept { return sigma_; }

    MarketParams with_delta(double delta) const { return {r_, delta, sigma_}; }
    MarketParams with_sigma(double sigma) const { return {r_, delta_, sigma}; }

    friend bool operator==(const MarketParams&, const MarketParams&) = default;

private:
    double r_;
    double delta_;
    double sigma_;
};

class LoanContract {
public:
    /// principal > 0, maturity > 0, loan_rate finite of either sign.
    LoanContract(double principal, double loan_rate, double maturity, DividendRegime regime);

    double principal() const noexcept { return principal_; }
    double loan_rate() const noexcept { return loan_rate_; }
    double maturity() const noexcept { return maturity_; }
    DividendRegime regime() const noexcept { return regime_; }

    LoanContract with_regime(DividendRegime regime) const {
        return {principal_, loan_rate_, maturity_, regime};
    }
    LoanContract with_maturity(double maturity) const {
        return {principal_, loan_rate_, maturity, regime_};
    }
    LoanContract with_principal(double principal) const {
        return {principal, loan_rate_, maturity_, regime_};
    }

    /// Amount Ke^{γt} needed to redeem at calendar time t.
    double redemption_amount(double t) const;

    friend bool operator==(const LoanContract&, const LoanContract&) = default;

private:
    double principal_;
    double loan_rate_;
    double maturity_;
    DividendRegime regime_;
};

/// r̄ = r - γ, the rate that survives the similarity reduction.
inline double effective_rate(const MarketParams& market, const LoanContract& contract) {
    return market.r() - contract.loan_rate();
}

struct SimilarityState {
    double x = 0.0;    // e^{-γt} S
    double a = 0.0;    // e^{-γt} I
    double tau = 0.0;  // T - t
};

struct CalendarState {
    double s = 0.0;
    double i = 0.0;
    double t = 0.0;
};

SimilarityState to_similarity(double s, double i, double t, const LoanContract& contract);
CalendarState from_similarity(const SimilarityState& state, const LoanContract& contract);

/// Redemption payoff at calendar time t.
///
/// Regime 1: (s - Ke^{γt})^+.
/// Regime 2: (s - Ke^{γt})^+ with s read as the reinvested position e^{δt} S.
/// Regime 3: (s - Ke^{γt})^+ + i, the intrinsic value including dividends already paid out.
/// Regime 4: (s + i - Ke^{γt})^+.
/// `i` is ignored for regimes 1 and 2.
double payoff(DividendRegime regime, double s, double i, double t, const LoanContract& contract);

/// Regime 2 priced as a regime-1 loan on the reinvested position Ŝ = e^{δt} S,
/// which carries no dividend. Returns (market with delta = 0, contract in regime 1).
struct ReducedProblem {
    MarketParams market;
    LoanContract contract;
};
ReducedProblem reduce_regime2(const MarketParams& market, const LoanContract& contract);

enum class RegionKind { Empty, NeverStrictlyOptimal, BoundaryCurve, BoundarySurface };
enum class ClosedFormKind { EuropeanCallEquivalent, ParityFormula, LinearPDE };

std::string_view to_string(RegionKind kind);
std::string_view to_string(ClosedFormKind kind);

struct RegimeClassification {
    RegionKind region = RegionKind::BoundaryCurve;
    std::optional<ClosedFormKind> closed_form;

    bool has_redemption_boundary() const {
        return region == RegionKind::BoundaryCurve || region == RegionKind::BoundarySurface;
    }
    friend bool operator==(const RegimeClassification&, const RegimeClassification&) = default;
};

/// Shape of the redemption region, decided from the signs of r - γ and δ.
RegimeClassification classify(const MarketParams& market, const LoanContract& contract);

}  // namespace stockloan
