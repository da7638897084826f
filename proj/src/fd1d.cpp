#include "stockloan/fd1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stockloan {

LogGridRates fitted_rates(double growth, double sigma, double dz) {
    const double diff = sigma * sigma / (dz * dz);
    // c_up (e^{dz} - 1) + c_down (e^{-dz} - 1) = growth and c_up + c_down = σ²/dz².
    const double up = (growth - diff * std::expm1(-dz)) / (2.0 * std::sinh(dz));
    const double down = diff - up;
    if (!(up >= 0.0 && down >= 0.0)) {
        throw UsageError("log grid too coarse for the drift: refine space_nodes");
    }
    return {down, up};
}

namespace {

struct Grid {
    double z0 = 0.0;
    double dz = 0.0;
    int n = 0;
    double x(int j) const { return std::exp(z0 + j * dz); }
};

Grid make_grid(const Problem1D& problem, double spot, const FDConfig& cfg) {
    if (cfg.space_nodes < 16) throw UsageError("space_nodes must be >= 16");
    if (cfg.time_steps < 1) throw UsageError("time_steps must be >= 1");
    if (!(cfg.psor_omega > 0.0 && cfg.psor_omega < 2.0)) throw UsageError("psor_omega must lie in (0, 2)");
    if (!(cfg.psor_tol > 0.0)) throw UsageError("psor_tol must be > 0");

    const double log_k = std::log(problem.principal());
    const double half = std::max(6.0 * problem.sigma() * std::sqrt(problem.horizon()), std::log(4.0));
    double lo = cfg.log_x_min.value_or(log_k - half);
    double hi = cfg.log_x_max.value_or(log_k + half);
    if (!cfg.log_x_min && spot > 0.0) lo = std::min(lo, std::log(spot) - 0.5);
    if (!cfg.log_x_max && spot > 0.0) hi = std::max(hi, std::log(spot) + 0.5);
    if (!(hi > lo)) throw UsageError("log_x_max must exceed log_x_min");

    Grid g;
    g.n = cfg.space_nodes;
    g.dz = (hi - lo) / (g.n - 1);
    g.z0 = lo;
    // Put K on a node when the domain is the default one, so the payoff kink is resolved.
    if (!cfg.log_x_min && !cfg.log_x_max) {
        g.z0 = log_k - std::round((log_k - lo) / g.dz) * g.dz;
    }
    return g;
}

struct StepCoefficients {
    double theta;
    double dt;
};

// Scheme row j: diag f_j - off_dn f_{j-1} - off_up f_{j+1} = rhs_j.
struct Rows {
    double diag;
    double off_dn;
    double off_up;
};

Rows lhs_rows(const LogGridRates& c, double rho, const StepCoefficients& s) {
    return {1.0 + s.theta * s.dt * (c.up + c.down + rho), s.theta * s.dt * c.down, s.theta * s.dt * c.up};
}

void build_rhs(const std::vector<double>& old, const std::vector<double>& source, const LogGridRates& c,
               double rho, const StepCoefficients& s, std::vector<double>& rhs) {
    const double w = (1.0 - s.theta) * s.dt;
    const std::size_t n = old.size();
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double gen = c.down * old[j - 1] - (c.up + c.down + rho) * old[j] + c.up * old[j + 1];
        rhs[j] = old[j] + w * gen + s.dt * source[j];
    }
}

}  // namespace

FDResult solve_vi(const Problem1D& problem, double spot, const FDConfig& cfg) {
    const Grid grid = make_grid(problem, spot, cfg);
    const int n = grid.n;
    const auto nn = static_cast<std::size_t>(n);
    const LogGridRates rates = fitted_rates(problem.growth_rate(), problem.sigma(), grid.dz);
    const double rho = problem.discount_rate();
    const double k = problem.principal();
    const double tol = cfg.psor_tol * k;

    std::vector<double> xs(nn), source(nn);
    for (int j = 0; j < n; ++j) {
        xs[static_cast<std::size_t>(j)] = grid.x(j);
        source[static_cast<std::size_t>(j)] = problem.source_rate(grid.x(j));
    }

    // Rannacher start: two implicit half steps, then Crank-Nicolson.
    const double dt = problem.horizon() / cfg.time_steps;
    std::vector<StepCoefficients> steps;
    steps.push_back({1.0, 0.5 * dt});
    steps.push_back({1.0, 0.5 * dt});
    for (int i = 1; i < cfg.time_steps; ++i) steps.push_back({0.5, dt});

    auto make_layer = [&](double tau) {
        Layer1D layer;
        layer.tau = tau;
        layer.log_x0 = grid.z0;
        layer.log_dx = grid.dz;
        layer.values.assign(nn, 0.0);
        layer.obstacle.resize(nn);
        layer.redeem.assign(nn, 0);
        for (std::size_t j = 0; j < nn; ++j) layer.obstacle[j] = problem.obstacle(xs[j], tau);
        return layer;
    };

    std::vector<Layer1D> layers;
    layers.reserve(steps.size() + 1);
    {
        Layer1D term = make_layer(0.0);
        for (std::size_t j = 0; j < nn; ++j) {
            term.values[j] = problem.terminal(xs[j]);
            term.redeem[j] = term.values[j] <= term.obstacle[j];
        }
        layers.push_back(std::move(term));
    }

    // Deep in the money the solution is a(τ)x - K b(τ); evolve a and b with the
    // same θ-scheme as the interior so the top row matches its neighbours.
    const bool linear_top = problem.variant() != LoanVariant::Amortized;
    const double carry_rate = problem.growth_rate() - rho;
    const double source_slope = problem.source_rate(1.0);
    double a_top = 1.0, b_top = 1.0;

    std::vector<double> rhs(nn);
    std::vector<double> theta_log;
    int max_iters = 0;
    double tau = 0.0;
    for (const auto& s : steps) {
        const Layer1D& prev = layers.back();
        tau += s.dt;
        Layer1D cur = make_layer(tau);
        const double cap = problem.cap(tau);
        build_rhs(prev.values, source, rates, rho, s, rhs);
        const Rows rows = lhs_rows(rates, rho, s);

        std::vector<double>& f = cur.values;
        f[0] = problem.far_low(xs[0], tau);
        if (linear_top) {
            a_top = (a_top * (1.0 + (1.0 - s.theta) * s.dt * carry_rate) + s.dt * source_slope) /
                    (1.0 - s.theta * s.dt * carry_rate);
            b_top = b_top * (1.0 - (1.0 - s.theta) * s.dt * rho) / (1.0 + s.theta * s.dt * rho);
            const double forward = a_top * xs[nn - 1] - k * b_top;
            f[nn - 1] = std::min(std::max(cur.obstacle[nn - 1], forward), cap);
        } else {
            f[nn - 1] = problem.far_high(xs[nn - 1], tau);
        }
        for (std::size_t j = 1; j + 1 < nn; ++j) f[j] = std::min(std::max(prev.values[j], cur.obstacle[j]), cap);

        int iter = 0;
        double worst = 0.0;
        for (; iter < cfg.psor_max_iter; ++iter) {
            worst = 0.0;
            for (std::size_t j = 1; j + 1 < nn; ++j) {
                const double gs = (rhs[j] + rows.off_dn * f[j - 1] + rows.off_up * f[j + 1]) / rows.diag;
                double next = f[j] + cfg.psor_omega * (gs - f[j]);
                next = std::min(std::max(next, cur.obstacle[j]), cap);
                worst = std::max(worst, std::abs(next - f[j]));
                f[j] = next;
            }
            if (worst < tol) break;
        }
        if (iter >= cfg.psor_max_iter) {
            throw SolverError("PSOR did not converge at tau=" + std::to_string(tau) +
                                  " (worst update " + std::to_string(worst) + ")",
                              worst);
        }
        max_iters = std::max(max_iters, iter + 1);
        for (std::size_t j = 0; j < nn; ++j) {
            if (!std::isfinite(f[j])) throw SolverError("finite-difference solve produced a non-finite value");
            cur.redeem[j] = f[j] <= cur.obstacle[j];
        }
        theta_log.push_back(s.theta);
        layers.push_back(std::move(cur));
    }

    // The domain top is a Dirichlet row, not evidence of redemption.
    const double x_cap = xs[nn - 2];
    FDResult out;
    out.surface = ValueSurface1D(std::move(layers), k, problem.coordinate(), problem.classification(), x_cap);
    out.surface.step_theta = std::move(theta_log);
    out.value = spot > 0.0 ? out.surface.layers().back().value_at(spot) : problem.far_low(0.0, problem.horizon());
    out.boundary = extract_boundary(out.surface);
    out.max_psor_iterations = max_iters;
    return out;
}

ComplementarityReport residual_report(const ValueSurface1D& surface, const Problem1D& problem, double tol) {
    if (surface.step_theta.size() + 1 != surface.layer_count()) {
        throw UsageError("residual_report needs a finite-difference surface");
    }
    const auto& first = surface.layer(0);
    const std::size_t nn = first.size();
    const LogGridRates rates = fitted_rates(problem.growth_rate(), problem.sigma(), first.log_dx);
    const double rho = problem.discount_rate();

    std::vector<double> source(nn), rhs(nn);
    for (std::size_t j = 0; j < nn; ++j) source[j] = problem.source_rate(first.x(j));

    ComplementarityReport rep;
    rep.min_obstacle_residual = 0.0;
    std::size_t checked = 0, violating = 0;
    for (std::size_t k = 1; k < surface.layer_count(); ++k) {
        const Layer1D& prev = surface.layer(k - 1);
        const Layer1D& cur = surface.layer(k);
        const StepCoefficients s{surface.step_theta[k - 1], cur.tau - prev.tau};
        build_rhs(prev.values, source, rates, rho, s, rhs);
        const Rows rows = lhs_rows(rates, rho, s);
        const double cap = problem.cap(cur.tau);
        const auto& f = cur.values;
        for (std::size_t j = 1; j + 1 < nn; ++j) {
            const double res = rows.diag * f[j] - rows.off_dn * f[j - 1] - rows.off_up * f[j + 1] - rhs[j];
            const double gap = f[j] - cur.obstacle[j];
            const double violation = std::abs(std::max(std::min(res, gap), f[j] - cap));
            rep.max_violation = std::max(rep.max_violation, violation);
            if (violation > tol) ++violating;
            ++checked;
            if (gap <= 0.0) {
                rep.min_obstacle_residual = std::min(rep.min_obstacle_residual, res);
            } else if (f[j] < cap) {
                rep.max_continuation_residual = std::max(rep.max_continuation_residual, std::abs(res));
            }
        }
    }
    rep.violating_fraction = checked ? static_cast<double>(violating) / static_cast<double>(checked) : 0.0;
    return rep;
}

}  // namespace stockloan
