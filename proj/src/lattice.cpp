#include "cdsbounds/lattice.hpp"

#include "cdsbounds/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cdsbounds {

std::array<DefaultScenario, kCorners> corner_states(const TenorGrid& grid, int i) {
    CDSB_REQUIRE(i >= 1 && i <= grid.size(), "interval index out of range");
    const double left = grid.time(i - 1) + kEpsilonTau;
    const double right = grid.time(i);
    return {DefaultScenario::default_at(left, 0.0), DefaultScenario::default_at(right, 0.0),
            DefaultScenario::default_at(left, 1.0), DefaultScenario::default_at(right, 1.0)};
}

namespace {

double premium_leg(const TenorGrid& grid, const CdsSpec& cds, int last) {
    double s = 0.0;
    for (int k = 1; k <= std::min(last, cds.maturity_index); ++k)
        s += premium_payment(grid, cds, k);
    return s;
}

double midpoint_discount(const TenorGrid& grid, int i) {
    return grid.discount(0.5 * (grid.time(i - 1) + grid.time(i)));
}

} // namespace

double discretized_pv(const TenorGrid& grid, const CdsSpec& cds, const DefaultScenario& state) {
    CDSB_REQUIRE(cds.maturity_index >= 1 && cds.maturity_index <= grid.size(),
                 "CDS maturity must lie on the tenor grid");
    if (!state.defaulted)
        return -premium_leg(grid, cds, cds.maturity_index);
    const int i = grid.interval_of(state.tau);
    if (i > cds.maturity_index)
        return -premium_leg(grid, cds, cds.maturity_index);
    const double h =
        (1.0 - state.rho - cds.spread * (state.tau - grid.time(i - 1))) * midpoint_discount(grid, i);
    return h - premium_leg(grid, cds, i - 1);
}

double discretized_annuity(const TenorGrid& grid, int maturity_index, const DefaultScenario& state) {
    // 𝒯_M(τ) = −Δ(τ, ρ=1) of a unit long CDS with unit spread
    const CdsSpec unit{maturity_index, 1.0, 1.0};
    return -discretized_pv(grid, unit, state.defaulted ? DefaultScenario::default_at(state.tau, 1.0)
                                                       : state);
}

ConstraintSystem build_system(const TenorGrid& grid, const CdsSpec& illiquid,
                              std::span<const MarketQuote> quotes, Side side) {
    validate_quotes(quotes);
    CDSB_REQUIRE(std::abs(std::abs(illiquid.notional) - 1.0) < 1e-12,
                 "constraint system is built for a unit-notional illiquid CDS");
    CDSB_REQUIRE(illiquid.maturity_index >= 1 && illiquid.maturity_index <= grid.size(),
                 "illiquid maturity beyond the tenor grid");
    for (const auto& q : quotes)
        CDSB_REQUIRE(q.maturity_index <= grid.size(), "quote maturity beyond the tenor grid");

    const int n = grid.size();
    const auto k = static_cast<Eigen::Index>(quotes.size());
    const Eigen::Index rows = static_cast<Eigen::Index>(kCorners) * n + 1;

    ConstraintSystem sys;
    sys.side = side;
    sys.quarters = n;
    sys.quotes = static_cast<int>(k);
    sys.B.resize(rows, k + 1);
    sys.b.resize(rows);
    sys.c.resize(k + 1);

    const CdsSpec old{illiquid.maturity_index, illiquid.spread, 1.0};
    const auto fill_row = [&](Eigen::Index r, const DefaultScenario& state) {
        for (Eigen::Index p = 0; p < k; ++p)
            sys.B(r, p) = discretized_pv(grid, as_cds(quotes[static_cast<std::size_t>(p)]), state);
        sys.B(r, k) = 1.0;
        sys.b(r) = discretized_pv(grid, old, state);
    };
    for (int i = 1; i <= n; ++i) {
        const auto corners = corner_states(grid, i);
        for (int j = 1; j <= kCorners; ++j)
            fill_row(row_index(i, j), corners[static_cast<std::size_t>(j - 1)]);
    }
    fill_row(rows - 1, DefaultScenario::survived());

    for (Eigen::Index p = 0; p < k; ++p)
        sys.c(p) = quotes[static_cast<std::size_t>(p)].upfront;
    sys.c(k) = 1.0;
    return sys;
}

} // namespace cdsbounds
