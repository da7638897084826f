// Crank-Nicolson finite differences in log x with projected SOR for the
// one-dimensional stock-loan variational inequalities.
#pragma once

#include "stockloan/problem.hpp"
#include "stockloan/surface.hpp"

#include <optional>

namespace stockloan {

struct FDConfig {
    int space_nodes = 400;
    int time_steps = 400;
    /// Defaults to ln K ± max(6σ√T, ln 4), widened to contain the spot.
    std::optional<double> log_x_min;
    std::optional<double> log_x_max;
    double psor_omega = 1.5;
    /// PSOR stops when the largest update falls below psor_tol · K.
    double psor_tol = 1e-12;
    int psor_max_iter = 10000;
};

/// Three-point generator rates on a uniform log grid of spacing dz.
///
/// Diffusion and drift are fitted so that the semi-discrete operator is exact
/// on both constants and e^z: the discrete dynamics keep e^{-growth·τ} x a
/// martingale, so linear-in-x solutions (deep in-the-money asymptotes, the
/// dividend source) carry no spatial truncation error.
struct LogGridRates {
    double down = 0.0;
    double up = 0.0;
};
LogGridRates fitted_rates(double growth, double sigma, double dz);

struct FDResult {
    double value = 0.0;
    ValueSurface1D surface;
    BoundaryCurve boundary;
    int max_psor_iterations = 0;
};

/// Marches backward in τ. The first step is replaced by two implicit-Euler
/// half steps, then Crank-Nicolson. Throws SolverError if PSOR stalls.
FDResult solve_vi(const Problem1D& problem, double spot, const FDConfig& config = {});

struct ComplementarityReport {
    /// max over interior nodes of |max(min(residual, f - lower), f - upper)|
    double max_violation = 0.0;
    /// Fraction of interior nodes whose violation exceeds `tol`.
    double violating_fraction = 0.0;
    /// Smallest scheme residual on nodes pinned to the lower obstacle (should be >= -tol).
    double min_obstacle_residual = 0.0;
    /// Largest |scheme residual| on free nodes (should be < tol).
    double max_continuation_residual = 0.0;
};

/// Re-evaluates the discrete scheme on a finished FD surface. Residuals are in
/// value units (the same units as the PSOR update tolerance).
ComplementarityReport residual_report(const ValueSurface1D& surface, const Problem1D& problem,
                                      double tol);

}  // namespace stockloan
