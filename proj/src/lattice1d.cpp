#include "stockloan/lattice1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stockloan {

CrrStep crr_step(double growth, double rho, double sigma, double horizon, int steps) {
    if (steps < 1) throw UsageError("lattice needs at least one step");
    CrrStep s;
    s.dt = horizon / steps;
    s.log_u = sigma * std::sqrt(s.dt);
    s.u = std::exp(s.log_u);
    s.d = std::exp(-s.log_u);
    s.p = (std::exp(growth * s.dt) - s.d) / (s.u - s.d);
    s.discount = std::exp(-rho * s.dt);
    if (!(s.p > 0.0 && s.p < 1.0)) {
        throw UsageError("risk-neutral probability " + std::to_string(s.p) +
                         " outside (0, 1); increase the number of steps");
    }
    return s;
}

namespace {

void require_regime(const LoanContract& contract, DividendRegime regime) {
    if (contract.regime() != regime) {
        throw UsageError(std::string("contract regime is ") + std::string(to_string(contract.regime())) +
                         ", expected " + std::string(to_string(regime)));
    }
}

}  // namespace

PricingResult1D solve_lattice(const Problem1D& problem, double spot, const LatticeConfig& config) {
    if (!(spot > 0.0)) throw DomainError("lattice spot must be > 0");
    if (!(config.x_max_mult > 1.0)) throw UsageError("x_max_mult must exceed 1");
    const int n = config.steps;
    const CrrStep step = crr_step(problem.growth_rate(), problem.discount_rate(), problem.sigma(),
                                  problem.horizon(), n);
    const double h = step.log_u;
    const double k = problem.principal();

    // Root layer half-width (in lattice units), even so every layer keeps the
    // parity of a tree rooted at `spot`.
    const double reach = std::max({0.0, std::log(config.x_max_mult * k / spot),
                                   std::log(spot * config.x_max_mult / k)});
    int m = static_cast<int>(std::ceil(reach / h));
    if (m % 2 != 0) ++m;

    const double log_spot = std::log(spot);
    std::vector<Layer1D> layers(static_cast<std::size_t>(n) + 1);

    auto init_layer = [&](int kk) -> Layer1D& {
        Layer1D& layer = layers[static_cast<std::size_t>(kk)];
        const int half = m + n - kk;
        layer.tau = kk * step.dt;
        layer.log_x0 = log_spot - half * h;
        layer.log_dx = 2.0 * h;
        const auto count = static_cast<std::size_t>(half + 1);
        layer.values.resize(count);
        layer.obstacle.resize(count);
        layer.redeem.resize(count);
        for (std::size_t i = 0; i < count; ++i) layer.obstacle[i] = problem.obstacle(layer.x(i), layer.tau);
        return layer;
    };

    {
        Layer1D& term = init_layer(0);
        for (std::size_t i = 0; i < term.size(); ++i) {
            term.values[i] = problem.terminal(term.x(i));
            term.redeem[i] = term.values[i] <= term.obstacle[i];
        }
    }

    const double pu = step.p;
    const double pd = 1.0 - step.p;
    for (int kk = 1; kk <= n; ++kk) {
        const Layer1D& prev = layers[static_cast<std::size_t>(kk - 1)];
        Layer1D& cur = init_layer(kk);
        const double cap = problem.cap(cur.tau);
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const double x = cur.x(i);
            const double cont = step.discount * (pu * prev.values[i + 1] + pd * prev.values[i]) +
                                problem.step_source(x, step.dt);
            const double obs = cur.obstacle[i];
            cur.redeem[i] = cont <= obs;
            cur.values[i] = std::min(std::max(cont, obs), cap);
        }
    }

    const Layer1D& root = layers.back();
    const double value = root.values[static_cast<std::size_t>(m / 2)];
    if (!std::isfinite(value)) throw SolverError("lattice produced a non-finite value");

    PricingResult1D out;
    out.value = value;
    out.surface = ValueSurface1D(std::move(layers), k, problem.coordinate(), problem.classification(),
                                 config.x_max_mult * k);
    return out;
}

PricingResult1D price_regime1(double spot, const MarketParams& market, const LoanContract& contract,
                              const LatticeConfig& config) {
    require_regime(contract, DividendRegime::LenderKeeps);
    return solve_lattice(Problem1D::build(market, contract), spot, config);
}

PricingResult1D price_regime2(double spot, const MarketParams& market, const LoanContract& contract,
                              const LatticeConfig& config) {
    require_regime(contract, DividendRegime::ReinvestedReturnedOnRedemption);
    return solve_lattice(Problem1D::build(market, contract), spot, config);
}

PricingResult1D price_regime3(double spot, const MarketParams& market, const LoanContract& contract,
                              const LatticeConfig& config) {
    require_regime(contract, DividendRegime::DeliveredImmediately);
    return solve_lattice(Problem1D::build(market, contract), spot, config);
}

PricingResult1D price_amortized(double spot, const MarketParams& market, const LoanContract& contract,
                                const LatticeConfig& config) {
    require_regime(contract, DividendRegime::LenderKeeps);
    return solve_lattice(Problem1D::build(market, contract, LoanVariant::Amortized), spot, config);
}

PricingResult1D price_withdrawable(double spot, const MarketParams& market, const LoanContract& contract,
                                   double cap, const LatticeConfig& config) {
    require_regime(contract, DividendRegime::LenderKeeps);
    if (!(cap > 0.0 && cap < contract.principal())) {
        throw UsageError("withdrawal price L must satisfy 0 < L < K");
    }
    return solve_lattice(Problem1D::build(market, contract, LoanVariant::Withdrawable, cap), spot, config);
}

}  // namespace stockloan
