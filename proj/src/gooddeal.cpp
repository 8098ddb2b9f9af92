#include "cdsbounds/gooddeal.hpp"

#include "cdsbounds/errors.hpp"
#include "cdsbounds/valuation.hpp"

#include <cmath>
#include <limits>

namespace cdsbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// a hedge that replicates the illiquid CDS has mean zero up to roundoff
constexpr double kMeanRoundoff = 1e-12;

void require_mean(double mean) {
    CDSB_REQUIRE(std::isfinite(mean) && mean >= -kMeanRoundoff,
                 "mean PV of the hedged position must be >= 0");
}

} // namespace

PriceRange price_range(Side side, double v_bound, double mean) {
    require_mean(mean);
    if (side == Side::lub)
        return {v_bound - mean, v_bound};
    return {v_bound, v_bound + mean};
}

double price_from_lambda(Side side, double v_bound, double mean, double lambda) {
    CDSB_REQUIRE(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
    require_mean(mean);
    return v_bound - sign(side) * lambda * mean;
}

const char* to_string(Regime r) {
    switch (r) {
    case Regime::interior: return "interior";
    case Regime::zero_return: return "zero_return";
    case Regime::at_bound: return "at_bound";
    case Regime::negative: return "negative";
    case Regime::arbitrage: return "arbitrage";
    }
    return "?";
}

ReturnRate rt_from_lambda(double lambda) {
    CDSB_REQUIRE(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
    if (lambda == 0.0)
        return {Regime::at_bound, kInf};
    if (lambda == 1.0)
        return {Regime::zero_return, 0.0};
    return {Regime::interior, (1.0 - lambda) / lambda};
}

double lambda_from_rt(double r_t) {
    CDSB_REQUIRE(r_t >= 0.0, "expected return must be non-negative");
    if (std::isinf(r_t))
        return 0.0;
    return 1.0 / (1.0 + r_t);
}

double price_from_rt(Side side, double v_bound, double mean, double r_t) {
    CDSB_REQUIRE(r_t >= 0.0, "expected return must be non-negative");
    const auto [lo, hi] = price_range(side, v_bound, mean);
    if (std::isinf(r_t))
        return v_bound;
    if (side == Side::lub)
        return lo + (hi - lo) * r_t / (1.0 + r_t);
    return lo + (hi - lo) / (1.0 + r_t);
}

ReturnRate rt_from_price(Side side, double v_bound, double mean, double price) {
    const auto [lo, hi] = price_range(side, v_bound, mean);
    // distance from the bound and from the zero-profit price
    const double to_bound = side == Side::lub ? hi - price : price - lo;
    const double to_zero = side == Side::lub ? price - lo : hi - price;
    if (to_bound < 0.0)
        return {Regime::arbitrage, std::numeric_limits<double>::quiet_NaN()};
    if (to_zero < 0.0)
        return {Regime::negative, std::numeric_limits<double>::quiet_NaN()};
    if (to_bound == 0.0)
        return {Regime::at_bound, kInf};
    if (to_zero == 0.0)
        return {Regime::zero_return, 0.0};
    return {Regime::interior, to_zero / to_bound};
}

std::optional<double> sharpe_from_price(Side side, double v_bound, double mean, double price) {
    const auto rr = rt_from_price(side, v_bound, mean, price);
    if (rr.regime == Regime::zero_return)
        return 0.0;
    if (rr.regime != Regime::interior)
        return std::nullopt;
    const double l_max = lambda_from_rt(rr.r_t) * mean;
    return rr.r_t / l_max;
}

double lmax_from_sharpe(double s_r, double mean) {
    CDSB_REQUIRE(s_r >= 0.0, "Sharpe ratio must be non-negative");
    require_mean(mean);
    if (s_r == 0.0)
        return mean;
    // 2Δ̄ / (1 + √(1+4sΔ̄)) equals (√(1+4sΔ̄) − 1)/(2s) without the cancellation
    return 2.0 * mean / (1.0 + std::sqrt(1.0 + 4.0 * s_r * mean));
}

double price_from_sharpe(Side side, double v_bound, double mean, double s_r) {
    if (mean == 0.0)
        return v_bound;
    return price_from_lambda(side, v_bound, mean, lmax_from_sharpe(s_r, mean) / mean);
}

GoodDealResult good_deal_from_rt(Side side, double v_bound, double mean, double r_t) {
    const auto [lo, hi] = price_range(side, v_bound, mean);
    GoodDealResult g;
    g.side = side;
    g.v_bound = v_bound;
    g.mean_pv = mean;
    g.u_min = lo;
    g.u_max = hi;
    g.r_t = r_t;
    g.lambda = lambda_from_rt(r_t);
    g.price = price_from_rt(side, v_bound, mean, r_t);
    g.l_max = g.lambda * mean;
    g.s_r = g.l_max > 0.0 ? r_t / g.l_max : (r_t == 0.0 ? 0.0 : kInf);
    return g;
}

GoodDealResult good_deal_from_sharpe(Side side, double v_bound, double mean, double s_r) {
    const double l_max = lmax_from_sharpe(s_r, mean);
    const double lambda = mean > 0.0 ? l_max / mean : 0.0;
    GoodDealResult g = good_deal_from_rt(side, v_bound, mean, rt_from_lambda(lambda).r_t);
    g.lambda = lambda;
    g.l_max = l_max;
    g.price = price_from_lambda(side, v_bound, mean, lambda);
    g.s_r = s_r;
    return g;
}

bool meets_criteria(const GoodDealResult& bid, const GoodDealResult& ask,
                    const CombinedCriteria& criteria) {
    CDSB_REQUIRE(bid.side == Side::glb && ask.side == Side::lub,
                 "criteria compare a bid (GLB) with an ask (LUB)");
    return bid.r_t >= criteria.min_rt && ask.r_t >= criteria.min_rt &&
           ask.price - bid.price >= criteria.min_spread;
}

std::pair<double, double> side_means(const TenorGrid& grid, const CdsSpec& illiquid,
                                     std::span<const MarketQuote> quotes, const NoArbBounds& bounds,
                                     const PhysicalMeasure& measure) {
    const auto lub = hedged_position(dealer_illiquid(illiquid, Side::lub), quotes, bounds.hedge_lub);
    const auto glb = hedged_position(dealer_illiquid(illiquid, Side::glb), quotes, bounds.hedge_glb);
    return {mean_pv(grid, lub, measure), mean_pv(grid, glb, measure)};
}

std::vector<SweepRow> robustness_sweep(const TenorGrid& grid, const CdsSpec& illiquid,
                                       std::span<const MarketQuote> quotes,
                                       const NoArbBounds& bounds, std::span<const double> pd1_grid,
                                       std::span<const NamedRecovery> recoveries, double r_t) {
    std::vector<SweepRow> rows;
    rows.reserve(pd1_grid.size() * recoveries.size());
    for (double pd1 : pd1_grid)
        for (const auto& rec : recoveries) {
            const auto measure = make_measure(pd1, grid.horizon(), rec.recovery);
            const auto [m_lub, m_glb] = side_means(grid, illiquid, quotes, bounds, measure);
            SweepRow row;
            row.pd1 = pd1;
            row.label = rec.label;
            row.mean_lub = m_lub;
            row.mean_glb = m_glb;
            row.ask = price_from_rt(Side::lub, bounds.v_lub, m_lub, r_t);
            row.bid = price_from_rt(Side::glb, bounds.v_glb, m_glb, r_t);
            rows.push_back(std::move(row));
        }
    return rows;
}

std::vector<SweepRow> robustness_sweep(const TenorGrid& grid, const CdsSpec& illiquid,
                                       std::span<const MarketQuote> quotes,
                                       std::span<const double> pd1_grid,
                                       std::span<const NamedRecovery> recoveries, double r_t) {
    const auto bounds = multi_cds_bounds(grid, illiquid, quotes);
    return robustness_sweep(grid, illiquid, quotes, bounds, pd1_grid, recoveries, r_t);
}

} // namespace cdsbounds
