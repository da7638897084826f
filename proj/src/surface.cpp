#include "stockloan/surface.hpp"

#include <algorithm>
#include <limits>

namespace stockloan {

double Layer1D::value_at(double x) const {
    const std::size_t n = size();
    if (n == 0) throw UsageError("empty layer");
    if (n == 1) return values[0];
    if (!(x > 0.0)) throw DomainError("interpolation point must be > 0");
    const double s = (std::log(x) - log_x0) / log_dx;
    const double last = static_cast<double>(n - 1);
    if (s < -1e-9 || s > last + 1e-9) throw DomainError("interpolation point outside the grid");
    const double sc = std::clamp(s, 0.0, last);
    auto j = static_cast<std::size_t>(std::floor(sc));
    if (j >= n - 1) j = n - 2;
    const double t = sc - static_cast<double>(j);
    if (j == 0 || j + 2 >= n) return values[j] + t * (values[j + 1] - values[j]);
    // Four-point Lagrange on nodes j-1..j+2, local coordinate t in [0, 1].
    const double tm = t + 1.0, t1 = t - 1.0, t2 = t - 2.0;
    const double w0 = -t * t1 * t2 / 6.0;
    const double w1 = tm * t1 * t2 / 2.0;
    const double w2 = -tm * t * t2 / 2.0;
    const double w3 = tm * t * t1 / 6.0;
    return w0 * values[j - 1] + w1 * values[j] + w2 * values[j + 1] + w3 * values[j + 2];
}

ValueSurface1D::ValueSurface1D(std::vector<Layer1D> layers, double principal, Coordinate coordinate,
                               RegimeClassification classification, double x_cap)
    : layers_(std::move(layers)),
      principal_(principal),
      coordinate_(coordinate),
      classification_(classification),
      x_cap_(x_cap) {}

std::size_t ValueSurface1D::layer_near(double tau) const {
    if (layers_.empty()) throw UsageError("empty surface");
    auto it = std::lower_bound(layers_.begin(), layers_.end(), tau,
                               [](const Layer1D& l, double t) { return l.tau < t; });
    if (it == layers_.end()) return layers_.size() - 1;
    const auto k = static_cast<std::size_t>(it - layers_.begin());
    if (k > 0 && std::abs(layers_[k - 1].tau - tau) <= std::abs(it->tau - tau)) return k - 1;
    return k;
}

std::size_t BoundaryCurve::index_near(double t) const {
    if (tau.empty()) throw UsageError("empty boundary curve");
    std::size_t best = 0;
    for (std::size_t k = 1; k < tau.size(); ++k) {
        if (std::abs(tau[k] - t) < std::abs(tau[best] - t)) best = k;
    }
    return best;
}

double BoundaryCurve::worst_decrease_in_nodes() const {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < size(); ++k) {
        const double a = x_star[k].value_or_inf();
        const double b = x_star[k + 1].value_or_inf();
        if (b >= a) continue;
        const double h = std::max(spacing[k], spacing[k + 1]);
        worst = std::max(worst, h > 0.0 ? (a - b) / h : std::numeric_limits<double>::infinity());
    }
    return worst;
}

BoundaryCurve extract_boundary(const ValueSurface1D& surface, double tol) {
    BoundaryCurve out;
    const double threshold = tol * surface.principal();
    for (const auto& layer : surface.layers()) {
        out.tau.push_back(layer.tau);
        BoundaryLevel level = BoundaryLevel::unbounded();
        double spacing = 0.0;
        for (std::size_t j = 0; j < layer.size(); ++j) {
            const double x = layer.x(j);
            if (x > surface.x_cap()) break;
            if (layer.values[j] - layer.obstacle[j] <= threshold) {
                level = BoundaryLevel::at(x);
                spacing = j > 0 ? x - layer.x(j - 1) : layer.x(1) - x;
                break;
            }
        }
        out.x_star.push_back(level);
        out.spacing.push_back(spacing);
    }
    return out;
}

}  // namespace stockloan
