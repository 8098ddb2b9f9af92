#include "cdsbounds/market_model.hpp"

#include "cdsbounds/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cdsbounds {

TenorGrid::TenorGrid(int quarters, double risk_free_rate, double quarter_length)
    : quarters_(quarters), rate_(risk_free_rate), quarter_length_(quarter_length) {
    CDSB_REQUIRE(quarters >= 1, "tenor grid needs at least one payment date");
    CDSB_REQUIRE(risk_free_rate >= 0.0, "risk-free rate must be non-negative");
    CDSB_REQUIRE(quarter_length > 0.0, "payment spacing must be positive");
}

double TenorGrid::time(int i) const {
    CDSB_REQUIRE(i >= 0 && i <= quarters_ + 1, "payment index out of range");
    return quarter_length_ * i;
}

std::vector<double> TenorGrid::payment_times() const {
    std::vector<double> t(static_cast<std::size_t>(quarters_));
    for (int i = 1; i <= quarters_; ++i)
        t[static_cast<std::size_t>(i - 1)] = time(i);
    return t;
}

double TenorGrid::discount(double t) const { return std::exp(-rate_ * t); }

int TenorGrid::interval_of(double tau) const {
    CDSB_REQUIRE(tau > 0.0, "default time must be positive");
    if (tau > horizon())
        return quarters_ + 1;
    int i = std::max(1, static_cast<int>(std::ceil(tau / quarter_length_)));
    // closed-right intervals (T_{i-1}, T_i]; correct for rounding in tau / q
    while (i > 1 && tau <= quarter_length_ * (i - 1))
        --i;
    while (i < quarters_ && tau > quarter_length_ * i)
        ++i;
    return i;
}

void validate_quotes(std::span<const MarketQuote> quotes) {
    int previous = 0;
    for (const auto& q : quotes) {
        CDSB_REQUIRE(q.maturity_index > previous,
                     "quote maturities must be positive and strictly increasing");
        CDSB_REQUIRE(q.spread >= 0.0, "quote spread must be non-negative");
        previous = q.maturity_index;
    }
}

CdsSpec as_cds(const MarketQuote& quote, double notional) {
    return {quote.maturity_index, quote.spread, notional};
}

DefaultScenario DefaultScenario::default_at(double tau, double rho) {
    CDSB_REQUIRE(tau > 0.0, "default time must be positive");
    CDSB_REQUIRE(rho >= 0.0 && rho <= 1.0, "recovery must lie in [0, 1]");
    return {true, tau, rho};
}

double HedgePortfolio::total_notional() const {
    double s = 0.0;
    for (double a : alphas)
        s += a;
    return s;
}

namespace {

void check_in_grid(const TenorGrid& grid, const CdsSpec& cds) {
    CDSB_REQUIRE(cds.maturity_index >= 1 && cds.maturity_index <= grid.size(),
                 "CDS maturity must lie on the tenor grid");
    CDSB_REQUIRE(cds.spread >= 0.0, "CDS spread must be non-negative");
}

// Σ_{k=1}^{last} g_k per unit notional
double premium_leg(const TenorGrid& grid, const CdsSpec& cds, int last) {
    double s = 0.0;
    for (int k = 1; k <= std::min(last, cds.maturity_index); ++k)
        s += cds.spread * grid.quarter_length() * grid.discount_at(k);
    return s;
}

} // namespace

double premium_payment(const TenorGrid& grid, const CdsSpec& cds, int i) {
    check_in_grid(grid, cds);
    CDSB_REQUIRE(i >= 1 && i <= grid.size(), "payment index out of range");
    if (i > cds.maturity_index)
        return 0.0;
    return cds.spread * (grid.time(i) - grid.time(i - 1)) * grid.discount_at(i);
}

double default_payment(const TenorGrid& grid, const CdsSpec& cds, double tau, double rho) {
    check_in_grid(grid, cds);
    CDSB_REQUIRE(rho >= 0.0 && rho <= 1.0, "recovery must lie in [0, 1]");
    const int i = grid.interval_of(tau);
    if (i > cds.maturity_index)
        return 0.0;
    return (1.0 - rho - cds.spread * (tau - grid.time(i - 1))) * grid.discount(tau);
}

double pathwise_pv(const TenorGrid& grid, const CdsSpec& cds, const DefaultScenario& scenario) {
    check_in_grid(grid, cds);
    if (!scenario.defaulted)
        return -cds.notional * premium_leg(grid, cds, cds.maturity_index);
    const int i = grid.interval_of(scenario.tau);
    if (i > cds.maturity_index)
        return -cds.notional * premium_leg(grid, cds, cds.maturity_index);
    return cds.notional * (default_payment(grid, cds, scenario.tau, scenario.rho) -
                           premium_leg(grid, cds, i - 1));
}

double annuity(const TenorGrid& grid, int maturity_index, std::optional<double> tau) {
    CDSB_REQUIRE(maturity_index >= 1 && maturity_index <= grid.size(),
                 "annuity maturity must lie on the tenor grid");
    const auto accrued = [&](int last) {
        double s = 0.0;
        for (int k = 1; k <= last; ++k)
            s += (grid.time(k) - grid.time(k - 1)) * grid.discount_at(k);
        return s;
    };
    if (!tau || *tau > grid.time(maturity_index))
        return accrued(maturity_index);
    const int i = grid.interval_of(*tau);
    return accrued(i - 1) + (*tau - grid.time(i - 1)) * grid.discount(*tau);
}

double Position::pv(const TenorGrid& grid, const DefaultScenario& scenario) const {
    double v = deposit;
    for (const auto& leg : legs)
        v += pathwise_pv(grid, leg, scenario);
    return v;
}

double Position::spread_part(const TenorGrid& grid, double tau) const {
    return pv(grid, DefaultScenario::default_at(tau, 1.0));
}

double Position::live_notional(const TenorGrid& grid, double tau) const {
    const int i = grid.interval_of(tau);
    double a = 0.0;
    for (const auto& leg : legs)
        if (i <= leg.maturity_index)
            a += leg.notional;
    return a;
}

double Position::live_spread_notional(const TenorGrid& grid, double tau) const {
    const int i = grid.interval_of(tau);
    double s = 0.0;
    for (const auto& leg : legs)
        if (i <= leg.maturity_index)
            s += leg.notional * leg.spread;
    return s;
}

double Position::survived_pv(const TenorGrid& grid) const {
    return pv(grid, DefaultScenario::survived());
}

int Position::last_maturity() const {
    int m = 0;
    for (const auto& leg : legs)
        m = std::max(m, leg.maturity_index);
    return m;
}

Position hedged_position(const CdsSpec& illiquid, std::span<const MarketQuote> quotes,
                         const HedgePortfolio& hedge) {
    CDSB_REQUIRE(hedge.alphas.size() == quotes.size(),
                 "hedge notionals must match the quote set");
    const double s = sign(hedge.side);
    Position pos;
    pos.deposit = s * hedge.deposit;
    pos.legs.reserve(quotes.size() + 1);
    pos.legs.push_back(illiquid);
    for (std::size_t p = 0; p < quotes.size(); ++p)
        pos.legs.push_back(as_cds(quotes[p], s * hedge.alphas[p]));
    return pos;
}

double portfolio_pv(const TenorGrid& grid, const CdsSpec& illiquid,
                    std::span<const MarketQuote> quotes, const HedgePortfolio& hedge,
                    const DefaultScenario& scenario) {
    return hedged_position(illiquid, quotes, hedge).pv(grid, scenario);
}

TenorGrid grid_for(const CdsSpec& illiquid, std::span<const MarketQuote> quotes,
                   double risk_free_rate, double quarter_length) {
    int n = illiquid.maturity_index;
    for (const auto& q : quotes)
        n = std::max(n, q.maturity_index);
    return TenorGrid(n, risk_free_rate, quarter_length);
}

} // namespace cdsbounds
