#include <doctest.h>

#include "stockloan/closedform.hpp"
#include "stockloan/lattice1d.hpp"

#include <cmath>

using namespace stockloan;

namespace {

constexpr double kK = 0.7;

const MarketParams fig1{0.06, 0.03, 0.4};

LoanContract loan(DividendRegime regime, double gamma = 0.1, double maturity = 1.0, double k = kK) {
    return {k, gamma, maturity, regime};
}

// Largest violation of each shape property over the layers of a lattice surface,
// restricted to x <= x_cap where the tree is not at the edge of double precision.
struct Shape {
    double below_obstacle = 0.0;
    double slope_low = 0.0;
    double slope_high = 0.0;
    double concave = 0.0;
    double tau_decrease = 0.0;
};

Shape shape_of(const ValueSurface1D& s) {
    Shape out;
    for (std::size_t k = 0; k < s.layer_count(); ++k) {
        const auto& L = s.layer(k);
        for (std::size_t j = 0; j < L.size(); ++j) {
            if (L.x(j) > s.x_cap()) break;
            out.below_obstacle = std::max(out.below_obstacle, L.obstacle[j] - L.values[j]);
            if (j + 1 < L.size()) {
                const double slope = (L.values[j + 1] - L.values[j]) / (L.x(j + 1) - L.x(j));
                out.slope_low = std::max(out.slope_low, -slope);
                out.slope_high = std::max(out.slope_high, slope - 1.0);
            }
            if (j > 0 && j + 1 < L.size()) {
                const double h0 = L.x(j) - L.x(j - 1), h1 = L.x(j + 1) - L.x(j);
                const double d2 = (L.values[j + 1] - L.values[j]) / h1 - (L.values[j] - L.values[j - 1]) / h0;
                out.concave = std::max(out.concave, -d2 / kK);
            }
        }
        // The tree recombines every other step, so compare layers two apart.
        if (k >= 2) {
            const auto& P = s.layer(k - 2);
            for (std::size_t j = 0; j < P.size(); ++j) {
                const double x = P.x(j);
                if (x > s.x_cap() || x < L.x_lo() || x > L.x_hi()) continue;
                out.tau_decrease = std::max(out.tau_decrease, P.values[j] - L.value_at(x));
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("no-dividend loan with r >= gamma is a European call") {
    const MarketParams m{0.1, 0.0, 0.3};
    const auto c = loan(DividendRegime::LenderKeeps, 0.05);
    const MarketParams reduced{0.05, 0.0, 0.3};
    for (double spot : {0.5, 0.7, 1.0}) {
        const double v = price_regime1(spot, m, c, {2000, 8.0}).value;
        const double e = european_call(spot, 1.0, reduced, kK);
        CHECK(std::abs(v - e) <= 1e-3 * e);
    }
    const auto b = extract_boundary(price_regime1(0.7, m, c, {400, 8.0}).surface);
    for (std::size_t k = 1; k < b.size(); ++k) CHECK(b.x_star[k].is_unbounded());
}

TEST_CASE("tiny principal redeems immediately") {
    const double v = price_regime1(0.9, fig1, loan(DividendRegime::LenderKeeps, 0.1, 1.0, 1e-9), {500, 8.0}).value;
    CHECK(v == doctest::Approx(0.9).epsilon(1e-8));
}

TEST_CASE("long maturity boundaries approach the perpetual levels") {
    // σ = 0.4 approaches its asymptote slowly: still about 1.69 at τ = 10.
    const auto b1 = extract_boundary(price_regime1(0.7, fig1, loan(DividendRegime::LenderKeeps, 0.1, 10.0), {4000, 8.0}).surface);
    const std::size_t k10 = b1.index_near(10.0);
    const double x_inf = perpetual_regime1(fig1, loan(DividendRegime::LenderKeeps)).x_star_inf.value();
    CHECK(b1.x_star[k10].value() <= x_inf + b1.spacing[k10]);
    CHECK(b1.x_star[k10].value() > 1.6);
    CHECK(b1.x_star[k10].value() > b1.x_star[b1.index_near(5.0)].value());

    const MarketParams fig2{0.06, 0.03, 0.15};
    const auto b2 = extract_boundary(
        price_regime2(0.7, fig2, loan(DividendRegime::ReinvestedReturnedOnRedemption, 0.1, 10.0), {4000, 8.0}).surface);
    CHECK(std::abs(b2.x_star[b2.index_near(10.0)].value() - 0.97) <= 0.05 * 0.97);
}

TEST_CASE("regime 2") {
    // r >= γ: European call on the reinvested stock
    const MarketParams m{0.1, 0.03, 0.3};
    const double v = price_regime2(0.8, m, loan(DividendRegime::ReinvestedReturnedOnRedemption, 0.05), {2000, 8.0}).value;
    const double e = european_call(0.8, 1.0, MarketParams{0.1, 0.0, 0.3}, kK * std::exp(0.05));
    CHECK(std::abs(v - e) <= 1e-3 * e);

    const MarketParams m0{0.06, 0.0, 0.4};
    const auto a = price_regime2(0.8, m0, loan(DividendRegime::ReinvestedReturnedOnRedemption), {500, 8.0});
    const auto b = price_regime1(0.8, m0, loan(DividendRegime::LenderKeeps), {500, 8.0});
    CHECK(a.value == b.value);
    CHECK(a.surface.layer(500).values == b.surface.layer(500).values);
}

TEST_CASE("regime 3") {
    const MarketParams m{0.1, 0.03, 0.3};
    const auto c = loan(DividendRegime::DeliveredImmediately, 0.05);
    for (double spot : {0.5, 0.8, 1.2}) {
        CHECK(std::abs(price_regime3(spot, m, c, {2000, 8.0}).value - parity_price_regime3(spot, 1.0, m, c)) < 5e-4);
    }

    const MarketParams m0{0.06, 0.0, 0.4};
    CHECK(price_regime3(0.8, m0, c, {500, 8.0}).value ==
          doctest::Approx(price_regime1(0.8, m0, loan(DividendRegime::LenderKeeps, 0.05), {500, 8.0}).value).epsilon(1e-14));
}

TEST_CASE("boundary ordering across regimes on the figure 1 grid") {
    const auto b1 = extract_boundary(price_regime1(0.7, fig1, loan(DividendRegime::LenderKeeps, 0.1, 3.0), {1000, 8.0}).surface);
    const auto b2 = extract_boundary(price_regime2(0.7, fig1, loan(DividendRegime::ReinvestedReturnedOnRedemption, 0.1, 3.0), {1000, 8.0}).surface);
    const auto b3 = extract_boundary(price_regime3(0.7, fig1, loan(DividendRegime::DeliveredImmediately, 0.1, 3.0), {1000, 8.0}).surface);
    for (std::size_t k = 0; k < b1.size(); ++k) {
        CHECK(b1.x_star[k].value_or_inf() <= b2.x_star[k].value_or_inf() + b2.spacing[k]);
        CHECK(b2.x_star[k].value_or_inf() <= b3.x_star[k].value_or_inf() + b3.spacing[k]);
    }
}

TEST_CASE("extracted boundary starts at K and rises with tau") {
    const auto r = price_regime1(0.7, fig1, loan(DividendRegime::LenderKeeps), {1000, 8.0});
    const auto b = extract_boundary(r.surface);
    const auto& L0 = r.surface.layer(0);
    CHECK(b.x_star[0].value() >= kK * (1.0 - 1e-12));
    CHECK(b.x_star[0].value() <= kK * std::exp(2.0 * L0.log_dx));
    CHECK(b.worst_decrease_in_nodes() <= 1.0);
    CHECK(b.x_star.back().value() > 1.1);
}

TEST_CASE("surface shape for regimes 1 to 3") {
    for (int reg : {1, 2, 3}) {
        CAPTURE(reg);
        const auto r = solve_lattice(Problem1D::build(fig1, loan(regime_from_number(reg))), kK, {600, 8.0});
        const auto s = shape_of(r.surface);
        CHECK(s.below_obstacle <= 0.0);
        CHECK(s.slope_low <= 1e-8);
        CHECK(s.slope_high <= 1e-8);
        CHECK(s.concave <= 1e-8);
        CHECK(s.tau_decrease <= 1e-8);
    }
}

TEST_CASE("convergence on the figure 1 instance") {
    const auto c = loan(DividendRegime::LenderKeeps);
    const double v500 = price_regime1(kK, fig1, c, {500, 8.0}).value;
    const double v1000 = price_regime1(kK, fig1, c, {1000, 8.0}).value;
    const double v2000 = price_regime1(kK, fig1, c, {2000, 8.0}).value;
    CHECK(std::abs(v500 - v1000) >= 1.5 * std::abs(v1000 - v2000));
}

TEST_CASE("crr step rejects probabilities outside (0, 1)") {
    CHECK_NOTHROW(crr_step(-0.04, -0.04, 0.4, 1.0, 100));
    CHECK_THROWS_AS(crr_step(5.0, 0.0, 0.05, 1.0, 1), UsageError);
}

TEST_CASE("amortized loan") {
    CHECK(amortized_rate(loan(DividendRegime::LenderKeeps)) == doctest::Approx(0.07 / (1.0 - std::exp(-0.1))));
    CHECK(amortized_rate(loan(DividendRegime::LenderKeeps)) == doctest::Approx(0.73559).epsilon(1e-5));
    CHECK(amortized_rate(loan(DividendRegime::LenderKeeps, 0.0, 2.0)) == doctest::Approx(0.35));

    const auto r = price_amortized(0.8, fig1, loan(DividendRegime::LenderKeeps), {800, 8.0});
    const auto& L0 = r.surface.layer(0);
    for (std::size_t j = 0; j < L0.size(); ++j) CHECK(L0.values[j] == doctest::Approx(L0.x(j)).epsilon(1e-14));
    double worst = 0.0;
    for (const auto& L : r.surface.layers()) {
        for (std::size_t j = 0; j < L.size(); ++j) worst = std::max(worst, L.obstacle[j] - L.values[j]);
    }
    CHECK(worst <= 0.0);
}

TEST_CASE("withdrawable loan") {
    const double cap = 0.3;
    const auto problem = Problem1D::build(fig1, loan(DividendRegime::LenderKeeps), LoanVariant::Withdrawable, cap);
    const auto r = price_withdrawable(1.0, fig1, loan(DividendRegime::LenderKeeps), cap, {800, 8.0});
    bool clamped_deep = false;
    for (const auto& L : r.surface.layers()) {
        // the cap is L in price terms, L e^{-γt} in scaled terms
        const double upper = problem.cap(L.tau);
        CHECK(upper <= cap);
        for (std::size_t j = 0; j < L.size(); ++j) {
            CHECK(L.values[j] <= upper);
            if (L.obstacle[j] > upper) {
                CHECK(L.values[j] == upper);
                clamped_deep = true;
            }
        }
    }
    CHECK(clamped_deep);
    CHECK_THROWS_AS(price_withdrawable(1.0, fig1, loan(DividendRegime::LenderKeeps), kK, {100, 8.0}), UsageError);

    // An upper obstacle far above every node payoff leaves the regime-1 problem untouched.
    const auto c = loan(DividendRegime::LenderKeeps);
    const auto wide = solve_lattice(Problem1D::build(fig1, c, LoanVariant::Withdrawable, 1e12), 0.9, {500, 8.0});
    CHECK(wide.value == price_regime1(0.9, fig1, c, {500, 8.0}).value);
}
