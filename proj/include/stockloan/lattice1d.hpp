// Recombining binomial lattice for the one-dimensional stock-loan problems.
#pragma once

#include "stockloan/problem.hpp"
#include "stockloan/surface.hpp"

namespace stockloan {

struct LatticeConfig {
    int steps = 2000;
    /// Every layer extends at least to [K / x_max_mult, K · x_max_mult]; boundary
    /// extraction reports Unbounded above K · x_max_mult.
    double x_max_mult = 8.0;
};

/// Cox-Ross-Rubinstein step parameters for a coordinate with drift `growth`
/// discounted at `rho`.
struct CrrStep {
    double dt = 0.0;
    double log_u = 0.0;  // σ√dt
    double u = 0.0;
    double d = 0.0;
    double p = 0.0;
    double discount = 0.0;  // e^{-ρ dt}
};

/// Throws UsageError when the up-probability leaves (0, 1).
CrrStep crr_step(double growth, double rho, double sigma, double horizon, int steps);

struct PricingResult1D {
    double value = 0.0;
    ValueSurface1D surface;
};

/// Backward induction for any 1-D problem, rooted at `spot` (in the problem's
/// coordinate at τ = T).
PricingResult1D solve_lattice(const Problem1D& problem, double spot, const LatticeConfig& config);

PricingResult1D price_regime1(double spot, const MarketParams& market, const LoanContract& contract,
                              const LatticeConfig& config = {});
/// Surface is in Ŝ-similarity coordinates; at t = 0, Ŝ = S.
PricingResult1D price_regime2(double spot, const MarketParams& market, const LoanContract& contract,
                              const LatticeConfig& config = {});
/// Returns H, the value excluding dividends already delivered (V₃ = H + I).
PricingResult1D price_regime3(double spot, const MarketParams& market, const LoanContract& contract,
                              const LatticeConfig& config = {});
/// Surface is in price coordinates (S, τ).
PricingResult1D price_amortized(double spot, const MarketParams& market, const LoanContract& contract,
                                const LatticeConfig& config = {});
/// Requires 0 < cap < K.
PricingResult1D price_withdrawable(double spot, const MarketParams& market, const LoanContract& contract,
                                   double cap, const LatticeConfig& config = {});

}  // namespace stockloan
