#include "stockloan/oracle.hpp"

#include "stockloan/lattice1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stockloan {

namespace {

struct RootValue {
    double value;
    double payoff_unclamped;
};

// Nodes are stored heap-style: children of node i are 2i+1 (up) and 2i+2 (down).
RootValue solve_tree(DividendRegime regime, double spot, double accrued, const MarketParams& market,
                     const LoanContract& contract, int steps) {
    if (steps < 1 || steps > kOracleMaxSteps) {
        throw UsageError("oracle steps must lie in 1.." + std::to_string(kOracleMaxSteps));
    }
    if (!(spot >= 0.0)) throw DomainError("spot must be >= 0");
    if (!(accrued >= 0.0)) throw DomainError("accrued dividends must be >= 0");

    MarketParams m = market;
    if (regime == DividendRegime::ReinvestedReturnedOnRedemption) {
        m = reduce_regime2(market, contract.with_regime(regime)).market;
    }
    const double r = m.r();
    const double gamma = contract.loan_rate();
    const double delta = m.delta();
    const double k = contract.principal();
    const bool tracks_accrual =
        regime == DividendRegime::DeliveredImmediately || regime == DividendRegime::CashReturnedOnRedemption;

    const CrrStep crr = crr_step(r - gamma - delta, r - gamma, m.sigma(), contract.maturity(), steps);
    const double dt = crr.dt;
    const double grow = std::exp(gamma * dt);
    const double up = crr.u * grow;
    const double down = crr.d * grow;
    const double disc = std::exp(-r * dt);
    const double carry = std::exp(r * dt);

    const std::size_t total = (std::size_t{1} << (steps + 1)) - 1;
    std::vector<double> s(total), acc(total, 0.0), value(total);
    s[0] = spot;
    acc[0] = accrued;
    for (int level = 0; level < steps; ++level) {
        const std::size_t first = (std::size_t{1} << level) - 1;
        const std::size_t last = (std::size_t{1} << (level + 1)) - 1;
        for (std::size_t i = first; i < last; ++i) {
            s[2 * i + 1] = s[i] * up;
            s[2 * i + 2] = s[i] * down;
            if (tracks_accrual) {
                const double next = (acc[i] + delta * s[i] * dt) * carry;
                acc[2 * i + 1] = next;
                acc[2 * i + 2] = next;
            }
        }
    }

    auto unclamped = [&](std::size_t i, double owed) {
        switch (regime) {
        case DividendRegime::LenderKeeps:
        case DividendRegime::ReinvestedReturnedOnRedemption:
        case DividendRegime::DeliveredImmediately:
            return s[i] - owed;
        case DividendRegime::CashReturnedOnRedemption:
            return s[i] + acc[i] - owed;
        }
        return 0.0;
    };
    auto exercise = [&](std::size_t i, double owed) {
        const double base = std::max(unclamped(i, owed), 0.0);
        return regime == DividendRegime::DeliveredImmediately ? base + acc[i] : base;
    };

    for (int level = steps; level >= 0; --level) {
        const double owed = k * std::exp(gamma * level * dt);
        const std::size_t first = (std::size_t{1} << level) - 1;
        const std::size_t last = (std::size_t{1} << (level + 1)) - 1;
        for (std::size_t i = first; i < last; ++i) {
            const double now = exercise(i, owed);
            if (level == steps) {
                value[i] = now;
                continue;
            }
            const double cont = disc * (crr.p * value[2 * i + 1] + (1.0 - crr.p) * value[2 * i + 2]);
            value[i] = std::max(now, cont);
        }
    }
    if (!std::isfinite(value[0])) throw SolverError("oracle produced a non-finite value");
    // Regime 3's redemption region compares H = V - I with S - K.
    const double extra = regime == DividendRegime::DeliveredImmediately ? acc[0] : 0.0;
    return {value[0], unclamped(0, k) + extra};
}

}  // namespace

double oracle_price(DividendRegime regime, double spot, double accrued, const MarketParams& market,
                    const LoanContract& contract, int steps) {
    return solve_tree(regime, spot, accrued, market, contract, steps).value;
}

std::vector<bool> oracle_boundary(DividendRegime regime, const MarketParams& market,
                                  const LoanContract& contract, int steps,
                                  std::span<const OracleProbe> probes) {
    std::vector<bool> out;
    out.reserve(probes.size());
    const double tol = 1e-12 * contract.principal();
    for (const auto& probe : probes) {
        const RootValue rv = solve_tree(regime, probe.x, probe.a, market, contract, steps);
        out.push_back(rv.value - rv.payoff_unclamped <= tol);
    }
    return out;
}

}  // namespace stockloan
