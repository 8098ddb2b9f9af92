#include "cdsbounds/hedging.hpp"

#include "cdsbounds/errors.hpp"
#include "cdsbounds/lattice.hpp"

#include <cmath>

namespace cdsbounds {

namespace {

HedgePortfolio to_hedge(const Eigen::VectorXd& v, Side side) {
    HedgePortfolio h;
    const Eigen::Index k = v.size() - 1;
    h.alphas.assign(v.data(), v.data() + k);
    h.deposit = v(k);
    h.side = side;
    return h;
}

LpSolution solve_or_throw(const ConstraintSystem& sys, const char* what) {
    LpSolution s = solve(sys);
    if (s.status != LpStatus::optimal)
        throw LpFailure(s.status, what);
    return s;
}

NoArbBounds lp_bounds(const TenorGrid& grid, const CdsSpec& illiquid,
                      std::span<const MarketQuote> quotes) {
    CDSB_REQUIRE(!quotes.empty(), "at least one market quote is needed");
    const auto lub = solve_or_throw(build_system(grid, illiquid, quotes, Side::lub), "LUB hedge");
    const auto glb = solve_or_throw(build_system(grid, illiquid, quotes, Side::glb), "GLB hedge");
    return {lub.objective, glb.objective, to_hedge(lub.variables, Side::lub),
            to_hedge(glb.variables, Side::glb)};
}

void require_same_maturity(const CdsSpec& illiquid, const MarketQuote& quote) {
    CDSB_REQUIRE(quote.maturity_index == illiquid.maturity_index,
                 "vanilla hedges need a quote at the illiquid maturity");
}

} // namespace

NoArbBounds multi_cds_bounds(const TenorGrid& grid, const CdsSpec& illiquid,
                             std::span<const MarketQuote> quotes) {
    return lp_bounds(grid, illiquid, quotes);
}

NoArbBounds vanilla_bounds(const TenorGrid& grid, const CdsSpec& illiquid, const MarketQuote& quote) {
    require_same_maturity(illiquid, quote);
    return lp_bounds(grid, illiquid, std::span<const MarketQuote>(&quote, 1));
}

NoArbBounds plain_vanilla_bounds(const TenorGrid& grid, const CdsSpec& illiquid,
                                 const MarketQuote& quote) {
    require_same_maturity(illiquid, quote);
    const double diff = quote.spread - illiquid.spread;
    const double w = std::abs(diff);
    const int mu = diff >= 0.0 ? +1 : -1;
    const double annuity0 = annuity(grid, illiquid.maturity_index, std::nullopt);
    // cheapest deposit keeping β' − σμ·𝒯_M(τ) >= 0 for all τ
    const auto beta_prime = [&](int sigma_mu) { return sigma_mu > 0 ? annuity0 : 0.0; };

    NoArbBounds out;
    const double beta_lub = w * beta_prime(+1 * mu);
    out.hedge_lub = {{1.0}, beta_lub, Side::lub};
    out.v_lub = quote.upfront + beta_lub;

    const double beta_glb = w * beta_prime(-1 * mu);
    out.hedge_glb = {{1.0}, -beta_glb, Side::glb};
    out.v_glb = quote.upfront - beta_glb;
    return out;
}

std::optional<std::size_t> matching_quote(const CdsSpec& illiquid,
                                          std::span<const MarketQuote> quotes) {
    for (std::size_t p = 0; p < quotes.size(); ++p)
        if (quotes[p].maturity_index == illiquid.maturity_index)
            return p;
    return std::nullopt;
}

double ScaledSolution::price_at(double w) const {
    return sign(side) * w * reduced_objective + upfront;
}

HedgePortfolio ScaledSolution::hedge_at(double w) const {
    // held notionals v = W v' plus the σ unit offsetting leg at p_M
    Eigen::VectorXd held = w * v_prime;
    held(static_cast<Eigen::Index>(matched)) += sign(side);
    return to_hedge(side == Side::lub ? held : Eigen::VectorXd(-held), side);
}

ScaledSolution reduce_to_scaled(const TenorGrid& grid, const CdsSpec& illiquid,
                                std::span<const MarketQuote> quotes, Side side) {
    const auto pm = matching_quote(illiquid, quotes);
    if (!pm)
        throw UnsupportedStructure("scaled reduction needs a market quote at the illiquid maturity");
    const double diff = quotes[*pm].spread - illiquid.spread;
    CDSB_REQUIRE(diff != 0.0, "scaled reduction is undefined at W = 0 (perfect replication)");

    ScaledSolution out;
    out.side = side;
    out.mu = diff > 0.0 ? +1 : -1;
    out.sigma_mu = static_cast<int>(sign(side)) * out.mu;
    out.W = std::abs(diff);
    out.matched = *pm;
    out.upfront = quotes[*pm].upfront;

    // Δ' = β' + Σ α'_p Δ_p − σμ·𝒯_M(τ) >= 0, minimize c'v'
    ConstraintSystem sys = build_system(grid, illiquid, quotes, Side::lub);
    const int m = illiquid.maturity_index;
    for (int i = 1; i <= grid.size(); ++i) {
        const auto corners = corner_states(grid, i);
        for (int j = 1; j <= kCorners; ++j)
            sys.b(row_index(i, j)) =
                out.sigma_mu * discretized_annuity(grid, m, corners[static_cast<std::size_t>(j - 1)]);
    }
    sys.b(sys.survived_row()) =
        out.sigma_mu * discretized_annuity(grid, m, DefaultScenario::survived());

    const LpSolution s = solve_or_throw(sys, "scaled hedge");
    out.v_prime = s.variables;
    out.reduced_objective = s.objective;
    return out;
}

CdsSpec dealer_illiquid(const CdsSpec& illiquid, Side side) {
    return {illiquid.maturity_index, illiquid.spread, -sign(side) * std::abs(illiquid.notional)};
}

} // namespace cdsbounds
