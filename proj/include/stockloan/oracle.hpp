// Exact optimal stopping on a full (non-recombining) binomial path tree.
//
// Every path carries its own stock price and accrued dividends, so the value
// is the exact optimum of the discrete model even when the payoff depends on
// the path. Cost is 2^steps leaves; intended for validating the production
// solvers on small instances only.
//
// Discrete accrual, shared with the forward shooting grid:
//   I_{k+1} = (I_k + δ S_k Δt) e^{rΔt}
// The CRR parameters are those of the similarity-coordinate lattice, so for
// regimes 1-2 the oracle and the lattice describe the same discrete model.
#pragma once

#include "stockloan/contracts.hpp"

#include <span>
#include <vector>

namespace stockloan {

inline constexpr int kOracleMaxSteps = 14;

/// Value at t = 0 of the loan with S₀ = spot and I₀ = accrued.
/// Regime 2 reads `spot` as Ŝ₀ (equal to S₀ at t = 0). Regime 3 returns the
/// full value V₃ = H + I₀.
double oracle_price(DividendRegime regime, double spot, double accrued, const MarketParams& market,
                    const LoanContract& contract, int steps);

struct OracleProbe {
    double x = 0.0;  // S₀ (or Ŝ₀)
    double a = 0.0;  // I₀
};

/// For each root state, whether redeeming immediately is optimal: the value
/// equals the unclamped redemption payoff (S + I - K for regime 4, S - K for
/// regimes 1-3 net of dividends already paid).
std::vector<bool> oracle_boundary(DividendRegime regime, const MarketParams& market,
                                  const LoanContract& contract, int steps,
                                  std::span<const OracleProbe> probes);

}  // namespace stockloan
