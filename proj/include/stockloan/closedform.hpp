// Closed-form results: Black-Scholes with continuous dividends, the parity
// price when dividends are delivered immediately, perpetual redeeming
// boundaries and the boundary limits at maturity.
#pragma once

#include "stockloan/contracts.hpp"

#include <optional>
#include <string>
#include <utility>

namespace stockloan {

/// A scaled redeeming boundary that may legitimately be +∞.
class BoundaryLevel {
public:
    static BoundaryLevel at(double x) { return BoundaryLevel(x); }
    static BoundaryLevel unbounded() { return BoundaryLevel(); }

    bool is_unbounded() const noexcept { return !level_.has_value(); }
    bool is_bounded() const noexcept { return level_.has_value(); }
    /// Throws UsageError when unbounded.
    double value() const;
    /// +inf when unbounded, for ordering comparisons.
    double value_or_inf() const noexcept;
    /// Shortest round-trip decimal, or the literal "inf".
    std::string to_string() const;

    friend bool operator==(const BoundaryLevel&, const BoundaryLevel&) = default;

private:
    BoundaryLevel() = default;
    explicit BoundaryLevel(double x) : level_(x) {}
    std::optional<double> level_;
};

double european_call(double spot, double tau, const MarketParams& market, double strike);
double european_put(double spot, double tau, const MarketParams& market, double strike);

/// Value excluding dividends already paid, for regime 3 with r >= γ:
/// C_E(S, t; r, δ, Ke^{γT}) + (1 - e^{-δτ}) S.
/// Outside r >= γ this is only a lower bound, so the call is rejected.
double parity_price_regime3(double spot, double tau, const MarketParams& market,
                            const LoanContract& contract);

/// Roots (α₊, α₋) of (σ²/2)α² + (r̄ - δ - σ²/2)α - r̄ = 0.
std::pair<double, double> characteristic_roots(double r_bar, double delta, double sigma);

struct PerpetualResult {
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    BoundaryLevel x_star_inf = BoundaryLevel::unbounded();
    std::optional<double> c1;  // only when x_star_inf is bounded
    double principal = 0.0;

    /// f∞(x) = C₁ x^{α₊} below the boundary, x - K above it.
    double value(double x) const;
    double slope(double x) const;
};

PerpetualResult perpetual_regime1(const MarketParams& market, const LoanContract& contract);
PerpetualResult perpetual_regime2(const MarketParams& market, const LoanContract& contract);

/// The perpetual loan with dividends delivered immediately is worth the stock
/// itself and is never redeemed.
struct PerpetualRegime3 {
    double value(double spot) const { return spot; }
    BoundaryLevel boundary() const { return BoundaryLevel::unbounded(); }
};
PerpetualRegime3 perpetual_regime3(const MarketParams& market, const LoanContract& contract);

struct TerminalLimit {
    double value = 0.0;  // scaled boundary as τ -> 0+
};

/// `scaled_accrued` is only read for regime 4.
TerminalLimit terminal_limit(DividendRegime regime, const MarketParams& market,
                             const LoanContract& contract, double scaled_accrued = 0.0);

}  // namespace stockloan
