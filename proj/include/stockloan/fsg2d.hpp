// Forward shooting grid for the loan whose accumulated cash dividends are
// returned on redemption. State (x, A, τ) with x = e^{-γt} S, A = e^{-γt} I.
//
// Each explicit step shoots every node to the accrued level it reaches over
// the step, A' = (A + δ x Δτ) e^{r̄Δτ}, interpolates the later layer linearly
// in A there, and applies the log-x stencil of the 1-D finite-difference
// backend. The accrual rule is the same one the path-tree oracle uses.
#pragma once

#include "stockloan/closedform.hpp"
#include "stockloan/contracts.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace stockloan {

struct FSG2DConfig {
    int space_nodes = 200;
    int a_nodes = 50;
    /// Output layers; each is subdivided as needed for explicit stability.
    int time_steps = 200;
    /// Defaults to K when r < γ, otherwise 2K e^{|r̄|T}.
    std::optional<double> a_max;
    /// Defaults to ln K - max(6σ√T, ln 200).
    std::optional<double> log_x_min;
    /// Defaults to ln K + max(6σ√T, ln 4).
    std::optional<double> log_x_max;
};

/// A' = (A + δ x dt) e^{r̄ dt}: the dividend of the step is collected at its
/// start and then grows with the scaled account.
inline double shoot_accrued(double a, double x, double delta, double r_bar, double dt) {
    return (a + delta * x * dt) * std::exp(r_bar * dt);
}

class ValueSurface2D {
public:
    ValueSurface2D() = default;
    ValueSurface2D(std::vector<double> tau, double log_x0, double log_dx, std::size_t nx, double da,
                   std::size_t na, double principal, RegimeClassification classification);

    const std::vector<double>& tau_grid() const noexcept { return tau_; }
    std::size_t layer_count() const noexcept { return tau_.size(); }
    std::size_t x_count() const noexcept { return nx_; }
    std::size_t a_count() const noexcept { return na_; }
    double x(std::size_t ix) const { return std::exp(log_x0_ + static_cast<double>(ix) * log_dx_); }
    double a(std::size_t ia) const { return static_cast<double>(ia) * da_; }
    double log_dx() const noexcept { return log_dx_; }
    double da() const noexcept { return da_; }
    double principal() const noexcept { return principal_; }
    const RegimeClassification& classification() const noexcept { return classification_; }

    double value(std::size_t layer, std::size_t ia, std::size_t ix) const {
        return values_[index(layer, ia, ix)];
    }
    bool redeem(std::size_t layer, std::size_t ia, std::size_t ix) const {
        return flags_[index(layer, ia, ix)] != 0;
    }
    double obstacle(std::size_t ia, std::size_t ix) const { return x(ix) + a(ia) - principal_; }
    /// Cubic in log x, linear in A, on layer `layer`.
    double value_at(double x, double a, std::size_t layer) const;
    std::size_t layer_near(double tau) const;

    double* layer_data(std::size_t layer) { return values_.data() + index(layer, 0, 0); }
    std::uint8_t* flag_data(std::size_t layer) { return flags_.data() + index(layer, 0, 0); }

private:
    std::size_t index(std::size_t layer, std::size_t ia, std::size_t ix) const {
        return (layer * na_ + ia) * nx_ + ix;
    }

    std::vector<double> tau_;
    double log_x0_ = 0.0;
    double log_dx_ = 0.0;
    std::size_t nx_ = 0;
    double da_ = 0.0;
    std::size_t na_ = 0;
    double principal_ = 0.0;
    RegimeClassification classification_;
    std::vector<double> values_;
    std::vector<std::uint8_t> flags_;
};

struct FSGResult {
    double value = 0.0;
    ValueSurface2D surface;
    int substeps = 1;  // explicit steps per output layer
};

/// Regime 4. Solves the unconstrained problem when the classification says
/// early redemption is never strictly optimal (r >= γ).
FSGResult price_regime4(double spot, double accrued, const MarketParams& market,
                        const LoanContract& contract, const FSG2DConfig& config = {});

/// r >= γ, δ > 0: the obstacle is switched off.
double price_regime4_linear(double spot, double accrued, const MarketParams& market,
                            const LoanContract& contract, const FSG2DConfig& config = {});

struct BoundarySurface {
    std::vector<double> tau;
    std::vector<double> a;  // A-nodes with A < K
    /// x_star[layer][ia]
    std::vector<std::vector<BoundaryLevel>> x_star;
    /// Local x-node spacing at the reported boundary (0 when unbounded).
    std::vector<std::vector<double>> spacing;
};

/// Per (A, τ) cell with A < K, the smallest x with f - (x + A - K) <= tol·K.
BoundarySurface extract_boundary_surface(const ValueSurface2D& surface, double tol = 1e-7);

}  // namespace stockloan
