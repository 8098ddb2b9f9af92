#pragma once

#include "cdsbounds/lp_core.hpp"
#include "cdsbounds/market_model.hpp"

#include <span>

namespace cdsbounds {

/// No-arbitrage bounds V^(+) (ask side) and V^(−) (bid side) with the
/// portfolios that enforce them.
struct NoArbBounds {
    double v_lub = 0.0;
    double v_glb = 0.0;
    HedgePortfolio hedge_lub;
    HedgePortfolio hedge_glb;
};

/// LP hedges over the full quote set.
NoArbBounds multi_cds_bounds(const TenorGrid& grid, const CdsSpec& illiquid,
                             std::span<const MarketQuote> quotes);

/// LP hedges restricted to the single quote at the illiquid maturity; the
/// optimizer is free to pick its notional.
NoArbBounds vanilla_bounds(const TenorGrid& grid, const CdsSpec& illiquid, const MarketQuote& quote);

/// Unit offsetting notional at the illiquid maturity, cheapest deposit in
/// closed form (no LP).
NoArbBounds plain_vanilla_bounds(const TenorGrid& grid, const CdsSpec& illiquid,
                                 const MarketQuote& quote);

/// Finds the quote whose maturity equals the illiquid maturity, if any.
std::optional<std::size_t> matching_quote(const CdsSpec& illiquid,
                                          std::span<const MarketQuote> quotes);

/// W-independent reduced hedge v' of a side, for the special case where a
/// market CDS matures with the illiquid one.
struct ScaledSolution {
    Eigen::VectorXd v_prime; ///< (α'_1..α'_K, β'); α' at p_M is δα_{p_M}/W
    Side side = Side::lub;
    int mu = +1;             ///< sign(w_{p_M} − w^Old)
    int sigma_mu = +1;
    double W = 0.0;          ///< |w_{p_M} − w^Old|
    std::size_t matched = 0; ///< index p_M
    double upfront = 0.0;    ///< u_{p_M}
    double reduced_objective = 0.0; ///< c'v'

    /// V^(σ)(μ)(W) = σ·W·c'v' + u_{p_M}
    double price() const { return price_at(W); }
    double price_at(double w) const;
    /// Full hedge at the stored W in the LP convention of `side`.
    HedgePortfolio hedge() const { return hedge_at(W); }
    HedgePortfolio hedge_at(double w) const;
};

ScaledSolution reduce_to_scaled(const TenorGrid& grid, const CdsSpec& illiquid,
                                std::span<const MarketQuote> quotes, Side side);

/// Illiquid contract as seen by the dealer on `side`: short for the ask
/// (LUB), long for the bid (GLB), unit notional.
CdsSpec dealer_illiquid(const CdsSpec& illiquid, Side side);

} // namespace cdsbounds
