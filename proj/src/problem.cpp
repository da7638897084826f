#include "stockloan/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stockloan {

std::string_view to_string(LoanVariant variant) {
    switch (variant) {
    case LoanVariant::Standard: return "standard";
    case LoanVariant::Amortized: return "amortized";
    case LoanVariant::Withdrawable: return "withdrawable";
    }
    return "unknown";
}

double amortized_rate(const LoanContract& contract) {
    const double g = contract.loan_rate();
    const double k = contract.principal();
    const double t = contract.maturity();
    if (g == 0.0) return k / t;
    return g * k / (1.0 - std::exp(-g * t));
}

Problem1D Problem1D::build(const MarketParams& market, const LoanContract& contract,
                           LoanVariant variant, std::optional<double> cap) {
    if (contract.regime() == DividendRegime::CashReturnedOnRedemption) {
        throw UsageError("cash dividends returned on redemption is a two-dimensional problem");
    }

    Problem1D p;
    p.regime_ = contract.regime();
    p.variant_ = variant;
    p.classification_ = classify(market, contract);
    p.k_ = contract.principal();
    p.gamma_ = contract.loan_rate();
    p.horizon_ = contract.maturity();
    p.sigma_ = market.sigma();

    double delta = market.delta();
    if (contract.regime() == DividendRegime::ReinvestedReturnedOnRedemption) {
        delta = reduce_regime2(market, contract).market.delta();
    }
    if (contract.regime() == DividendRegime::DeliveredImmediately) p.delta_source_ = delta;

    if (variant == LoanVariant::Amortized) {
        if (contract.regime() != DividendRegime::LenderKeeps) {
            throw UsageError("the amortized variant is defined for dividends kept by the lender");
        }
        p.coordinate_ = Coordinate::Price;
        p.rho_ = market.r();
        p.growth_ = market.r() - delta;
        p.amortized_c_ = amortized_rate(contract);
        return p;
    }

    p.coordinate_ = Coordinate::ScaledPrice;
    p.rho_ = effective_rate(market, contract);
    p.growth_ = p.rho_ - delta;

    if (variant == LoanVariant::Withdrawable) {
        if (contract.regime() != DividendRegime::LenderKeeps) {
            throw UsageError("the withdrawal variant is defined for dividends kept by the lender");
        }
        if (!cap || !(*cap > 0.0)) throw UsageError("withdrawal variant needs a positive cap L");
        p.cap_ = *cap;
    }
    return p;
}

double Problem1D::obstacle(double x, double tau) const {
    if (variant_ == LoanVariant::Amortized) {
        // Outstanding balance (C/γ)(1 - e^{-γτ}), Cτ in the γ -> 0 limit.
        const double owed = gamma_ == 0.0 ? amortized_c_ * tau
                                          : amortized_c_ / gamma_ * (1.0 - std::exp(-gamma_ * tau));
        return x - owed;
    }
    return x - k_;
}

double Problem1D::terminal(double x) const {
    if (variant_ == LoanVariant::Amortized) return x;
    const double payoff = std::max(x - k_, 0.0);
    return std::min(payoff, cap(0.0));
}

double Problem1D::cap(double tau) const {
    if (!cap_) return std::numeric_limits<double>::infinity();
    // V <= L in price units is f <= L e^{-γt} in scaled units.
    return *cap_ * std::exp(-gamma_ * (horizon_ - tau));
}

double Problem1D::source_rate(double x) const {
    if (variant_ == LoanVariant::Amortized) return -amortized_c_;
    return delta_source_ * x;
}

double Problem1D::step_source(double x, double dt) const {
    if (variant_ == LoanVariant::Amortized) {
        return -amortized_c_ * (rho_ == 0.0 ? dt : -std::expm1(-rho_ * dt) / rho_);
    }
    if (delta_source_ == 0.0) return 0.0;
    // Under the risk-neutral measure e^{-r̄s} E[x_s] = x e^{-δs}.
    return -x * std::expm1(-delta_source_ * dt);
}

double Problem1D::far_low(double x, double tau) const {
    if (variant_ == LoanVariant::Amortized) {
        const double hold = rho_ == 0.0 ? -amortized_c_ * tau : amortized_c_ * std::expm1(-rho_ * tau) / rho_;
        return std::max(obstacle(x, tau), x * std::exp(-(rho_ - growth_) * tau) + hold);
    }
    // Dividends delivered so far dominate near zero: f ≈ (1 - e^{-δτ}) x.
    const double f = -x * std::expm1(-delta_source_ * tau);
    return std::min(std::max(f, 0.0), cap(tau));
}

double Problem1D::far_high(double x, double tau) const {
    const double carry = rho_ - growth_;  // δ in the solver coordinate
    if (variant_ == LoanVariant::Amortized) {
        const double hold = rho_ == 0.0 ? -amortized_c_ * tau : amortized_c_ * std::expm1(-rho_ * tau) / rho_;
        return std::max(obstacle(x, tau), x * std::exp(-carry * tau) + hold);
    }
    // Deep in the money the loan is held to maturity or redeemed now.
    double forward = x * std::exp(-carry * tau) - k_ * std::exp(-rho_ * tau);
    if (delta_source_ > 0.0) forward += -x * std::expm1(-delta_source_ * tau);
    return std::min(std::max(obstacle(x, tau), forward), cap(tau));
}

}  // namespace stockloan
