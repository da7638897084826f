#include "stockloan/fsg2d.hpp"

#include "stockloan/fd1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stockloan {

ValueSurface2D::ValueSurface2D(std::vector<double> tau, double log_x0, double log_dx, std::size_t nx,
                               double da, std::size_t na, double principal,
                               RegimeClassification classification)
    : tau_(std::move(tau)),
      log_x0_(log_x0),
      log_dx_(log_dx),
      nx_(nx),
      da_(da),
      na_(na),
      principal_(principal),
      classification_(classification),
      values_(tau_.size() * na * nx, 0.0),
      flags_(tau_.size() * na * nx, 0) {}

std::size_t ValueSurface2D::layer_near(double t) const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < tau_.size(); ++k) {
        if (std::abs(tau_[k] - t) < std::abs(tau_[best] - t)) best = k;
    }
    return best;
}

double ValueSurface2D::value_at(double xq, double aq, std::size_t layer) const {
    if (!(xq > 0.0)) throw DomainError("x must be > 0");
    const double s = (std::log(xq) - log_x0_) / log_dx_;
    const double last = static_cast<double>(nx_ - 1);
    if (s < -1e-9 || s > last + 1e-9) throw DomainError("x outside the grid");
    const double a_top = static_cast<double>(na_ - 1) * da_;
    if (aq < 0.0 || aq > a_top * (1.0 + 1e-12)) throw DomainError("A outside the grid");

    auto along_x = [&](std::size_t ia) {
        const double sc = std::clamp(s, 0.0, last);
        auto j = static_cast<std::size_t>(std::floor(sc));
        if (j >= nx_ - 1) j = nx_ - 2;
        const double t = sc - static_cast<double>(j);
        auto v = [&](std::size_t ix) { return value(layer, ia, ix); };
        if (j == 0 || j + 2 >= nx_) return v(j) + t * (v(j + 1) - v(j));
        const double tm = t + 1.0, t1 = t - 1.0, t2 = t - 2.0;
        return -t * t1 * t2 / 6.0 * v(j - 1) + tm * t1 * t2 / 2.0 * v(j) - tm * t * t2 / 2.0 * v(j + 1) +
               tm * t * t1 / 6.0 * v(j + 2);
    };

    const double sa = std::min(aq / da_, static_cast<double>(na_ - 1));
    auto ia = static_cast<std::size_t>(std::floor(sa));
    if (ia >= na_ - 1) ia = na_ - 2;
    const double w = sa - static_cast<double>(ia);
    return (1.0 - w) * along_x(ia) + w * along_x(ia + 1);
}

namespace {

struct Setup {
    double log_x0 = 0.0;
    double dz = 0.0;
    std::size_t nx = 0;
    double da = 0.0;
    std::size_t na = 0;
    double a_max = 0.0;
};

Setup make_setup(double spot, const MarketParams& market, const LoanContract& contract,
                 const FSG2DConfig& cfg, bool closure) {
    if (cfg.space_nodes < 8 || cfg.a_nodes < 8) throw UsageError("FSG grids need at least 8 nodes each");
    if (cfg.time_steps < 1) throw UsageError("FSG needs at least one time step");
    const double k = contract.principal();
    const double t = contract.maturity();
    const double r_bar = effective_rate(market, contract);
    const double spread = 6.0 * market.sigma() * std::sqrt(t);

    double lo = cfg.log_x_min.value_or(std::log(k) - std::max(spread, std::log(200.0)));
    double hi = cfg.log_x_max.value_or(std::log(k) + std::max(spread, std::log(4.0)));
    if (!cfg.log_x_min && spot > 0.0) lo = std::min(lo, std::log(spot) - 0.5);
    if (!cfg.log_x_max && spot > 0.0) hi = std::max(hi, std::log(spot) + 0.5);
    if (!(hi > lo)) throw UsageError("log_x_max must exceed log_x_min");

    Setup s;
    s.nx = static_cast<std::size_t>(cfg.space_nodes);
    s.dz = (hi - lo) / static_cast<double>(s.nx - 1);
    s.log_x0 = lo;
    // K on a node resolves the A = 0 payoff kink, as in the 1-D solver.
    if (!cfg.log_x_min && !cfg.log_x_max) {
        const double log_k = std::log(k);
        s.log_x0 = log_k - std::round((log_k - lo) / s.dz) * s.dz;
    }
    s.a_max = cfg.a_max.value_or(closure ? k : 2.0 * k * std::exp(std::abs(r_bar) * t));
    if (!(s.a_max >= k)) throw UsageError("a_max must be >= K");
    s.na = static_cast<std::size_t>(cfg.a_nodes);
    s.da = s.a_max / static_cast<double>(s.na - 1);
    return s;
}

FSGResult run_fsg(double spot, double accrued, const MarketParams& market, const LoanContract& contract,
                  const FSG2DConfig& cfg, bool constrained) {
    if (contract.regime() != DividendRegime::CashReturnedOnRedemption) {
        throw UsageError("the forward shooting grid prices the cash-returned-on-redemption regime only");
    }
    if (!(spot > 0.0)) throw DomainError("spot must be > 0");
    if (!(accrued >= 0.0)) throw DomainError("accrued dividends must be >= 0");

    const auto cls = classify(market, contract);
    const double k = contract.principal();
    const double r_bar = effective_rate(market, contract);
    const double delta = market.delta();
    // Above A = K immediate redemption is optimal when r < γ, which closes the A-grid exactly.
    const bool closure = constrained && r_bar < 0.0;
    const Setup s = make_setup(spot, market, contract, cfg, closure);
    const LogGridRates rates = fitted_rates(r_bar - delta, market.sigma(), s.dz);

    const double dt_out = contract.maturity() / cfg.time_steps;
    const int sub = std::max(1, static_cast<int>(std::ceil(dt_out * (rates.up + rates.down) / 0.95)));
    const double dt = dt_out / sub;
    const double w_up = rates.up * dt;
    const double w_dn = rates.down * dt;
    const double w_mid = 1.0 - w_up - w_dn;
    const double disc = std::exp(-r_bar * dt);

    std::vector<double> tau(static_cast<std::size_t>(cfg.time_steps) + 1);
    for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = static_cast<double>(i) * dt_out;

    const std::size_t nx = s.nx, na = s.na;
    ValueSurface2D surf(tau, s.log_x0, s.dz, nx, s.da, na, k, cls);
    std::vector<double> xs(nx), as(na);
    for (std::size_t ix = 0; ix < nx; ++ix) xs[ix] = surf.x(ix);
    for (std::size_t ia = 0; ia < na; ++ia) as[ia] = surf.a(ia);

    std::vector<double> cur(na * nx), next(na * nx);
    std::vector<std::uint8_t> flags(na * nx);
    for (std::size_t ia = 0; ia < na; ++ia) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double obs = xs[ix] + as[ia] - k;
            cur[ia * nx + ix] = std::max(obs, 0.0);
            flags[ia * nx + ix] = obs >= 0.0;
        }
    }
    std::copy(cur.begin(), cur.end(), surf.layer_data(0));
    std::copy(flags.begin(), flags.end(), surf.flag_data(0));

    const double a_top = s.a_max;
    // Locates A' on the A-grid: lower node index and weight; closure handled by the caller.
    // Shots from the top row extrapolate freely; interior rows may overshoot by one cell.
    auto locate = [&](double a_shot, bool from_top, std::size_t& ia0, double& w) {
        if (a_shot > a_top) {
            if (!from_top && a_shot > a_top + s.da * (1.0 + 1e-9)) {
                throw DomainError("accrued dividends left the A-grid (a_max too small) at A'=" +
                                  std::to_string(a_shot));
            }
            ia0 = na - 2;
            w = (a_shot - as[na - 2]) / s.da;  // one-sided linear extrapolation
            return;
        }
        const double sa = a_shot / s.da;
        ia0 = std::min(static_cast<std::size_t>(sa), na - 2);
        w = sa - static_cast<double>(ia0);
    };

    double tau_now = 0.0;
    for (int layer = 1; layer <= cfg.time_steps; ++layer) {
        for (int step = 0; step < sub; ++step) {
            tau_now = (layer - 1) * dt_out + (step + 1) * dt;
            const double far = k * std::exp(-r_bar * tau_now);
            for (std::size_t ia = 0; ia < na; ++ia) {
                const double a = as[ia];
                double* out = next.data() + ia * nx;
                std::uint8_t* fl = flags.data() + ia * nx;
                if (closure && a >= k) {
                    for (std::size_t ix = 0; ix < nx; ++ix) {
                        out[ix] = xs[ix] + a - k;
                        fl[ix] = 1;
                    }
                    continue;
                }
                for (std::size_t ix = 0; ix < nx; ++ix) {
                    const double x = xs[ix];
                    const double obs = x + a - k;
                    double cont;
                    if (ix + 1 == nx) {
                        cont = x + a - far;
                    } else {
                        const double a_shot = shoot_accrued(a, x, delta, r_bar, dt);
                        auto at = [&](std::size_t m) {
                            if (closure && a_shot >= k) return xs[m] + a_shot - k;
                            std::size_t ia0;
                            double w;
                            locate(a_shot, ia + 1 == na, ia0, w);
                            const double lo = cur[ia0 * nx + m];
                            const double hi = cur[(ia0 + 1) * nx + m];
                            return lo + w * (hi - lo);
                        };
                        if (ix == 0) {
                            cont = disc * at(0);
                        } else {
                            cont = disc * (w_dn * at(ix - 1) + w_mid * at(ix) + w_up * at(ix + 1));
                        }
                    }
                    if (constrained) {
                        fl[ix] = cont <= obs;
                        out[ix] = std::max(cont, obs);
                    } else {
                        fl[ix] = 0;
                        out[ix] = cont;
                    }
                }
            }
            cur.swap(next);
        }
        for (double v : cur) {
            if (!std::isfinite(v)) throw SolverError("forward shooting grid produced a non-finite value");
        }
        std::copy(cur.begin(), cur.end(), surf.layer_data(static_cast<std::size_t>(layer)));
        std::copy(flags.begin(), flags.end(), surf.flag_data(static_cast<std::size_t>(layer)));
    }

    FSGResult res;
    res.substeps = sub;
    if (closure && accrued >= k) {
        res.value = spot + accrued - k;
    } else {
        res.value = surf.value_at(spot, accrued, surf.layer_count() - 1);
    }
    res.surface = std::move(surf);
    return res;
}

}  // namespace

FSGResult price_regime4(double spot, double accrued, const MarketParams& market,
                        const LoanContract& contract, const FSG2DConfig& config) {
    const bool constrained = classify(market, contract).region == RegionKind::BoundarySurface;
    return run_fsg(spot, accrued, market, contract, config, constrained);
}

double price_regime4_linear(double spot, double accrued, const MarketParams& market,
                            const LoanContract& contract, const FSG2DConfig& config) {
    if (!(market.r() >= contract.loan_rate() && market.delta() > 0.0)) {
        throw UsageError("the linear problem applies only for r >= loan rate and delta > 0");
    }
    return run_fsg(spot, accrued, market, contract, config, false).value;
}

BoundarySurface extract_boundary_surface(const ValueSurface2D& surface, double tol) {
    BoundarySurface out;
    const double k = surface.principal();
    const double threshold = tol * k;
    std::size_t na_used = 0;
    while (na_used < surface.a_count() && surface.a(na_used) < k * (1.0 - 1e-12)) {
        out.a.push_back(surface.a(na_used));
        ++na_used;
    }
    out.tau = surface.tau_grid();
    const std::size_t nx = surface.x_count();
    for (std::size_t layer = 0; layer < surface.layer_count(); ++layer) {
        std::vector<BoundaryLevel> row;
        std::vector<double> spacing;
        for (std::size_t ia = 0; ia < na_used; ++ia) {
            BoundaryLevel level = BoundaryLevel::unbounded();
            double h = 0.0;
            // The top row is Dirichlet data, not a solved node.
            for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
                if (surface.value(layer, ia, ix) - surface.obstacle(ia, ix) <= threshold) {
                    level = BoundaryLevel::at(surface.x(ix));
                    h = ix > 0 ? surface.x(ix) - surface.x(ix - 1) : surface.x(1) - surface.x(0);
                    break;
                }
            }
            row.push_back(level);
            spacing.push_back(h);
        }
        out.x_star.push_back(std::move(row));
        out.spacing.push_back(std::move(spacing));
    }
    return out;
}

}  // namespace stockloan
