#pragma once

// Good-deal prices: a dealer quoting away from the no-arbitrage bound V
// passes a fraction λ of the hedged position's expected payoff Δ̄ to the
// counterparty. λ is parametrized by the expected return on capital at risk
// r_t = (1−λ)/λ or by the effective Sharpe ratio s_r = r_t / (λΔ̄).

#include "cdsbounds/hedging.hpp"
#include "cdsbounds/market_model.hpp"
#include "cdsbounds/measure.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cdsbounds {

/// Potentially acceptable prices of one side: the zero-expected-profit price
/// and the no-arbitrage bound, ordered.
struct PriceRange {
    double u_min = 0.0;
    double u_max = 0.0;
};

PriceRange price_range(Side side, double v_bound, double mean);

/// u = V − σλΔ̄, λ in [0, 1].
double price_from_lambda(Side side, double v_bound, double mean, double lambda);

/// Where a price or parameter sits relative to the acceptable range.
enum class Regime {
    interior,    ///< 0 < r_t < ∞
    zero_return, ///< r_t = 0, λ = 1
    at_bound,    ///< r_t = +∞, λ = 0
    negative,    ///< beyond the zero-profit price: expected profit < 0
    arbitrage,   ///< beyond the no-arbitrage bound
};

const char* to_string(Regime r);

struct ReturnRate {
    Regime regime = Regime::interior;
    double r_t = 0.0; ///< +∞ when at_bound; meaningless for negative/arbitrage

    bool finite() const { return regime == Regime::interior || regime == Regime::zero_return; }
};

/// r_t = (1−λ)/λ; λ = 0 reports at_bound with r_t = +∞.
ReturnRate rt_from_lambda(double lambda);
/// λ = 1/(1+r_t); r_t = +∞ gives 0.
double lambda_from_rt(double r_t);

/// ask: u_min + (u_max−u_min)·r/(1+r); bid: u_min + (u_max−u_min)/(1+r).
double price_from_rt(Side side, double v_bound, double mean, double r_t);

/// Inverse of price_from_rt.
ReturnRate rt_from_price(Side side, double v_bound, double mean, double price);

/// s_r = r_t / (λΔ̄); nullopt outside the interior.
std::optional<double> sharpe_from_price(Side side, double v_bound, double mean, double price);

/// Positive root l of s_r·l² + l − Δ̄ = 0; s_r = 0 gives Δ̄.
double lmax_from_sharpe(double s_r, double mean);

double price_from_sharpe(Side side, double v_bound, double mean, double s_r);

struct GoodDealResult {
    Side side = Side::lub;
    double v_bound = 0.0;
    double mean_pv = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double lambda = 0.0;
    double r_t = 0.0;
    double price = 0.0;
    double l_max = 0.0;
    double s_r = 0.0;
};

GoodDealResult good_deal_from_rt(Side side, double v_bound, double mean, double r_t);
GoodDealResult good_deal_from_sharpe(Side side, double v_bound, double mean, double s_r);

/// Minimum return and minimum bid-ask spread applied together.
struct CombinedCriteria {
    double min_rt = 0.0;
    double min_spread = 0.0;
};

bool meets_criteria(const GoodDealResult& bid, const GoodDealResult& ask,
                    const CombinedCriteria& criteria);

struct NamedRecovery {
    std::string label;
    RecoveryDensity recovery;
};

struct SweepRow {
    double pd1 = 0.0;
    std::string label;
    double mean_lub = 0.0;
    double mean_glb = 0.0;
    double bid = 0.0;
    double ask = 0.0;
};

/// Bid and ask at `r_t` for every (pd1, recovery) cell, rows ordered by pd1
/// then recovery. Hedges come from `bounds` and stay fixed across cells.
std::vector<SweepRow> robustness_sweep(const TenorGrid& grid, const CdsSpec& illiquid,
                                       std::span<const MarketQuote> quotes,
                                       const NoArbBounds& bounds, std::span<const double> pd1_grid,
                                       std::span<const NamedRecovery> recoveries, double r_t);

/// Same, solving the multi-CDS hedges first.
std::vector<SweepRow> robustness_sweep(const TenorGrid& grid, const CdsSpec& illiquid,
                                       std::span<const MarketQuote> quotes,
                                       std::span<const double> pd1_grid,
                                       std::span<const NamedRecovery> recoveries, double r_t);

/// Δ̄ of the dealer's hedged position on each side under `measure`.
std::pair<double, double> side_means(const TenorGrid& grid, const CdsSpec& illiquid,
                                     std::span<const MarketQuote> quotes, const NoArbBounds& bounds,
                                     const PhysicalMeasure& measure);

} // namespace cdsbounds
