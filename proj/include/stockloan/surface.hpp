// Discrete value surfaces and redeeming boundaries shared by the 1-D solvers.
#pragma once

#include "stockloan/closedform.hpp"
#include "stockloan/contracts.hpp"
#include "stockloan/problem.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace stockloan {

/// One τ-slice on a uniform grid in log x.
struct Layer1D {
    double tau = 0.0;
    double log_x0 = 0.0;
    double log_dx = 0.0;
    std::vector<double> values;
    std::vector<double> obstacle;
    std::vector<std::uint8_t> redeem;  // value equals the lower obstacle

    std::size_t size() const noexcept { return values.size(); }
    double x(std::size_t j) const { return std::exp(log_x0 + static_cast<double>(j) * log_dx); }
    double x_lo() const { return x(0); }
    double x_hi() const { return x(size() - 1); }
    /// Cubic Lagrange interpolation in log x; linear on the two outermost cells.
    double value_at(double x) const;
};

class ValueSurface1D {
public:
    ValueSurface1D() = default;
    ValueSurface1D(std::vector<Layer1D> layers, double principal, Coordinate coordinate,
                   RegimeClassification classification, double x_cap);

    const std::vector<Layer1D>& layers() const noexcept { return layers_; }
    const Layer1D& layer(std::size_t k) const { return layers_.at(k); }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    double principal() const noexcept { return principal_; }
    Coordinate coordinate() const noexcept { return coordinate_; }
    const RegimeClassification& classification() const noexcept { return classification_; }
    /// Boundary extraction ignores nodes above this level.
    double x_cap() const noexcept { return x_cap_; }

    /// Index of the layer whose τ is closest to `tau`.
    std::size_t layer_near(double tau) const;
    double value_at(double x, double tau) const { return layer(layer_near(tau)).value_at(x); }

    /// Per-step implicitness used by the finite-difference backend (empty for lattices).
    std::vector<double> step_theta;

private:
    std::vector<Layer1D> layers_;
    double principal_ = 0.0;
    Coordinate coordinate_ = Coordinate::ScaledPrice;
    RegimeClassification classification_;
    double x_cap_ = 0.0;
};

struct BoundaryCurve {
    std::vector<double> tau;
    std::vector<BoundaryLevel> x_star;
    /// Local node spacing at the reported boundary (0 when unbounded).
    std::vector<double> spacing;

    std::size_t size() const noexcept { return tau.size(); }
    /// Index of the point whose τ is closest to `t`.
    std::size_t index_near(double t) const;
    /// Largest decrease x*(τ_k) - x*(τ_{k+1}) measured in local node spacings
    /// (0 when the curve is non-decreasing). Unbounded points count as +inf.
    double worst_decrease_in_nodes() const;
};

/// Per layer, the smallest node x <= x_cap with value - obstacle <= tol·K.
BoundaryCurve extract_boundary(const ValueSurface1D& surface, double tol = 1e-7);

}  // namespace stockloan
