#include <doctest.h>

#include "stockloan/fsg2d.hpp"
#include "stockloan/lattice1d.hpp"

#include <cmath>

using namespace stockloan;

namespace {

constexpr double kK = 0.7;

const MarketParams fig3{0.06, 0.03, 0.4};

LoanContract loan4(double gamma = 0.1, double maturity = 1.0) {
    return {kK, gamma, maturity, DividendRegime::CashReturnedOnRedemption};
}

}  // namespace

TEST_CASE("accrual shot") {
    CHECK(shoot_accrued(0.2, 1.0, 0.03, -0.04, 0.1) == doctest::Approx((0.2 + 0.003) * std::exp(-0.004)).epsilon(1e-15));
    CHECK(shoot_accrued(0.2, 1.0, 0.0, 0.0, 0.1) == 0.2);
}

TEST_CASE("terminal layer is the payoff") {
    const auto r = price_regime4(kK, 0.0, fig3, loan4(), {100, 20, 50});
    const auto& s = r.surface;
    for (std::size_t ia = 0; ia < s.a_count(); ++ia) {
        for (std::size_t ix = 0; ix < s.x_count(); ++ix) {
            CHECK(s.value(0, ia, ix) == std::max(s.obstacle(ia, ix), 0.0));
        }
    }
}

TEST_CASE("accrued above K redeems immediately when r < gamma") {
    FSG2DConfig cfg{100, 30, 100};
    cfg.a_max = 1.5 * kK;
    const auto s = price_regime4(kK, 0.0, fig3, loan4(), cfg).surface;
    int rows = 0;
    for (std::size_t ia = 0; ia < s.a_count(); ++ia) {
        if (s.a(ia) < kK) continue;
        ++rows;
        for (std::size_t k = 0; k < s.layer_count(); ++k) {
            for (std::size_t ix = 0; ix < s.x_count(); ++ix) {
                CHECK(s.value(k, ia, ix) == s.x(ix) + s.a(ia) - kK);
            }
        }
    }
    CHECK(rows > 1);
}

TEST_CASE("r equal to gamma with accrued above K") {
    const MarketParams m{0.1, 0.03, 0.4};
    const double v = price_regime4(0.6, 0.8, m, loan4(0.1), {200, 50, 200}).value;
    CHECK(std::abs(v - (0.6 + 0.8 - kK)) < 1e-3 * kK);
}

TEST_CASE("r above gamma never redeems early") {
    const MarketParams m{0.1, 0.03, 0.4};
    const auto c = loan4(0.05);
    CHECK(classify(m, c).region == RegionKind::Empty);
    const auto r = price_regime4(kK, 0.0, m, c, {100, 30, 100});
    const auto& s = r.surface;
    for (std::size_t k = 1; k < s.layer_count(); ++k) {
        for (std::size_t ia = 0; ia + 1 < s.a_count(); ++ia) {
            for (std::size_t ix = 1; ix + 1 < s.x_count(); ++ix) {
                CHECK(s.value(k, ia, ix) > s.obstacle(ia, ix));
                CHECK_FALSE(s.redeem(k, ia, ix));
            }
        }
    }
    CHECK(price_regime4_linear(kK, 0.0, m, c, {100, 30, 100}) == r.value);
    CHECK_THROWS_AS(price_regime4_linear(kK, 0.0, fig3, loan4(), {100, 30, 100}), UsageError);
}

TEST_CASE("surface shape on the figure 3 parameters") {
    const auto s = price_regime4(kK, 0.0, fig3, loan4(), {}).surface;
    double below = 0.0, a_drop = 0.0, a_steep = 0.0, tau_drop = 0.0, concave = 0.0;
    for (std::size_t k = 0; k < s.layer_count(); ++k) {
        for (std::size_t ia = 0; ia < s.a_count(); ++ia) {
            for (std::size_t ix = 0; ix < s.x_count(); ++ix) {
                const double v = s.value(k, ia, ix);
                below = std::max(below, std::max(s.obstacle(ia, ix), 0.0) - v);
                if (ia > 0) {
                    const double d = (v - s.value(k, ia - 1, ix)) / (s.a(ia) - s.a(ia - 1));
                    a_drop = std::max(a_drop, -d);
                    a_steep = std::max(a_steep, d - 1.0);
                }
                if (k > 0) tau_drop = std::max(tau_drop, s.value(k - 1, ia, ix) - v);
                if (ix > 0 && ix + 1 < s.x_count()) {
                    const double d2 = (s.value(k, ia, ix + 1) - v) / (s.x(ix + 1) - s.x(ix)) -
                                      (v - s.value(k, ia, ix - 1)) / (s.x(ix) - s.x(ix - 1));
                    concave = std::max(concave, -d2 / kK);
                }
            }
        }
    }
    CHECK(below <= 0.0);
    CHECK(a_drop <= 1e-8);
    CHECK(a_steep <= 1e-8);
    CHECK(tau_drop <= 1e-8);
    CHECK(concave <= 1e-8);
}

TEST_CASE("redeeming boundary surface") {
    const auto r = price_regime4(kK, 0.0, fig3, loan4(0.1, 3.0), {});
    const auto b = extract_boundary_surface(r.surface);
    REQUIRE(!b.a.empty());
    for (double a : b.a) CHECK(a < kK);

    // τ = 0: the straight line x + A = K
    for (std::size_t ia = 0; ia < b.a.size(); ++ia) {
        CHECK(std::abs(b.x_star[0][ia].value() - (kK - b.a[ia])) <= b.spacing[0][ia]);
    }
    // non-increasing in A, non-decreasing in τ, one node of slack
    for (std::size_t k = 0; k < b.tau.size(); ++k) {
        for (std::size_t ia = 0; ia < b.a.size(); ++ia) {
            const double x = b.x_star[k][ia].value_or_inf();
            if (ia > 0) CHECK(x <= b.x_star[k][ia - 1].value_or_inf() + b.spacing[k][ia - 1]);
            if (k > 0) CHECK(x + b.spacing[k][ia] >= b.x_star[k - 1][ia].value_or_inf());
        }
    }

    // A = 0 column sits below the regime-2 boundary
    const auto b2 = extract_boundary(price_regime2(kK, fig3, loan4(0.1, 3.0).with_regime(DividendRegime::ReinvestedReturnedOnRedemption), {1500, 8.0}).surface);
    for (std::size_t k = 0; k < b.tau.size(); k += 10) {
        const std::size_t k2 = b2.index_near(b.tau[k]);
        CHECK(b.x_star[k][0].value_or_inf() <= b2.x_star[k2].value_or_inf() + std::max(b.spacing[k][0], b2.spacing[k2]));
    }
}

TEST_CASE("value sits below the regime-2 loan on the combined position") {
    // From the second step on; the first explicit step across the kink x + A = K
    // carries a startup error of its own.
    const auto c = loan4();
    const auto f4 = price_regime4(kK, 0.0, fig3, c, {200, 200, 200}).surface;
    const auto v2 = price_regime2(kK, fig3, c.with_regime(DividendRegime::ReinvestedReturnedOnRedemption), {2000, 8.0}).surface;
    double worst = 0.0;
    for (std::size_t k = 2; k < f4.layer_count(); ++k) {
        const auto& L = v2.layer(v2.layer_near(f4.tau_grid()[k]));
        for (std::size_t ia = 0; ia < f4.a_count(); ++ia) {
            for (std::size_t ix = 0; ix < f4.x_count(); ++ix) {
                const double x = f4.x(ix) + f4.a(ia);
                if (x < L.x_lo() || x > L.x_hi()) continue;
                worst = std::max(worst, f4.value(k, ia, ix) - L.value_at(x));
            }
        }
    }
    CHECK(worst <= 1e-3 * kK);
}

TEST_CASE("interior shot past the A grid without closure is a domain error") {
    const MarketParams m{0.2, 0.06, 0.4};
    FSG2DConfig cfg{16, 8, 8};
    cfg.a_max = kK;
    CHECK_THROWS_AS(price_regime4(kK, 0.0, m, loan4(0.0, 5.0), cfg), DomainError);
}

TEST_CASE("without dividends the cash regime is regime 1") {
    const MarketParams m{0.06, 0.0, 0.4};
    const auto c = loan4();
    for (double spot : {0.5, 0.7, 1.0}) {
        const double v4 = price_regime4(spot, 0.0, m, c, {400, 50, 400}).value;
        const double v1 = price_regime1(spot, m, c.with_regime(DividendRegime::LenderKeeps), {2000, 8.0}).value;
        CHECK(std::abs(v4 - v1) <= 1e-3 * kK);
    }
}
