// Solver-ready description of a one-dimensional stock-loan problem.
//
// Regimes 1-3 and the withdrawal variant are posed in similarity coordinates
// (x = e^{-γt} S, τ = T - t), where the redemption obstacle x - K does not
// move in time. The amortized variant is posed directly in S because its
// repayment schedule is already time dependent.
#pragma once

#include "stockloan/contracts.hpp"

#include <optional>
#include <string_view>

namespace stockloan {

enum class LoanVariant { Standard, Amortized, Withdrawable };
std::string_view to_string(LoanVariant variant);

enum class Coordinate { ScaledPrice, Price };

/// Amortized repayment rate C = γK / (1 - e^{-γT}); K/T when γ = 0.
double amortized_rate(const LoanContract& contract);

class Problem1D {
public:
    /// Regime 4 is two-dimensional and rejected here. Regime 2 is reduced to a
    /// dividend-free regime-1 problem on Ŝ. `cap` is the withdrawal price L and
    /// is required for (and only read by) the withdrawal variant; any positive
    /// value is accepted at this level.
    static Problem1D build(const MarketParams& market, const LoanContract& contract,
                           LoanVariant variant = LoanVariant::Standard,
                           std::optional<double> cap = std::nullopt);

    DividendRegime regime() const noexcept { return regime_; }
    LoanVariant variant() const noexcept { return variant_; }
    Coordinate coordinate() const noexcept { return coordinate_; }
    const RegimeClassification& classification() const noexcept { return classification_; }

    double principal() const noexcept { return k_; }
    double horizon() const noexcept { return horizon_; }
    double sigma() const noexcept { return sigma_; }
    /// Rate used to discount the continuation value.
    double discount_rate() const noexcept { return rho_; }
    /// Risk-neutral drift of the solver coordinate.
    double growth_rate() const noexcept { return growth_; }

    double obstacle(double x, double tau) const;
    double terminal(double x) const;
    /// Upper obstacle; +inf when the variant has none.
    double cap(double tau) const;
    bool has_cap() const noexcept { return cap_.has_value(); }
    /// Continuous source term of the PDE (δx for regime 3, -C when amortized).
    double source_rate(double x) const;
    /// Expected discounted source collected over one step of length dt from x.
    double step_source(double x, double dt) const;

    /// Dirichlet data for truncated domains.
    double far_low(double x, double tau) const;
    double far_high(double x, double tau) const;

private:
    Problem1D() = default;

    DividendRegime regime_ = DividendRegime::LenderKeeps;
    LoanVariant variant_ = LoanVariant::Standard;
    Coordinate coordinate_ = Coordinate::ScaledPrice;
    RegimeClassification classification_;
    double k_ = 0.0;
    double gamma_ = 0.0;
    double horizon_ = 0.0;
    double sigma_ = 0.0;
    double rho_ = 0.0;
    double growth_ = 0.0;
    double delta_source_ = 0.0;
    double amortized_c_ = 0.0;
    std::optional<double> cap_;
};

}  // namespace stockloan
