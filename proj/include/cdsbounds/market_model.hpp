#pragma once

// Contracts, quarterly tenor grid and pathwise present values of CDS payoff
// streams. All values are per unit notional unless a notional is applied.

#include <optional>
#include <span>
#include <vector>

namespace cdsbounds {

/// Quarterly payment grid T_0 = 0 < T_1 < ... < T_N with a flat
/// continuously-compounded risk-free rate.
class TenorGrid {
  public:
    TenorGrid(int quarters, double risk_free_rate, double quarter_length = 0.25);

    int size() const { return quarters_; }
    double quarter_length() const { return quarter_length_; }
    double risk_free_rate() const { return rate_; }

    /// T_i, i in [0, N].
    double time(int i) const;
    double horizon() const { return time(quarters_); }
    std::vector<double> payment_times() const;

    double discount(double t) const;
    /// d_i = exp(-r T_i)
    double discount_at(int i) const { return discount(time(i)); }

    /// Index i such that tau lies in (T_{i-1}, T_i]. Returns N+1 when tau > T_N.
    int interval_of(double tau) const;

  private:
    int quarters_;
    double rate_;
    double quarter_length_;
};

/// A CDS position: maturity in quarters, running spread per year, signed
/// notional (> 0 long protection).
struct CdsSpec {
    int maturity_index = 0;
    double spread = 0.0;
    double notional = 1.0;
};

struct MarketQuote {
    int maturity_index = 0;
    double upfront = 0.0;
    double spread = 0.0;
};

using QuoteSet = std::vector<MarketQuote>;

/// Throws ArgumentError unless maturities are strictly increasing and positive.
void validate_quotes(std::span<const MarketQuote> quotes);

/// Unit-notional long CDS equivalent of a market quote.
CdsSpec as_cds(const MarketQuote& quote, double notional = 1.0);

struct DefaultScenario {
    bool defaulted = false;
    double tau = 0.0;
    double rho = 0.0;

    static DefaultScenario survived() { return {}; }
    static DefaultScenario default_at(double tau, double rho);
};

/// +1: dealer is short the illiquid protection and long the hedge (LUB, ask side).
/// -1: dealer is long the illiquid protection and short the hedge (GLB, bid side).
enum class Side { lub = +1, glb = -1 };

inline double sign(Side s) { return s == Side::lub ? 1.0 : -1.0; }

/// LP variables of a hedge in the sign convention of the side: for Side::lub
/// the dealer holds (alphas, deposit); for Side::glb the dealer holds
/// -(alphas, deposit).
struct HedgePortfolio {
    std::vector<double> alphas;
    double deposit = 0.0;
    Side side = Side::lub;

    double total_notional() const;
};

double premium_payment(const TenorGrid& grid, const CdsSpec& cds, int i);

/// Loss payment net of accrued spread, discounted exactly at tau.
double default_payment(const TenorGrid& grid, const CdsSpec& cds, double tau, double rho);

/// Present value of the payoff stream of `cds` (notional applied).
double pathwise_pv(const TenorGrid& grid, const CdsSpec& cds, const DefaultScenario& scenario);

/// Discounted accrual time 𝒯_M(tau); nullopt (or tau > T_M) gives 𝒯_{M,0}.
double annuity(const TenorGrid& grid, int maturity_index, std::optional<double> tau);

/// A static position: cash deposit plus signed CDS legs. The hedged illiquid
/// position is one of these.
struct Position {
    double deposit = 0.0;
    std::vector<CdsSpec> legs;

    double pv(const TenorGrid& grid, const DefaultScenario& scenario) const;
    /// Δ(tau, rho=1): the premium-leg part, continuous in tau.
    double spread_part(const TenorGrid& grid, double tau) const;
    /// Sum of notionals of legs still alive at tau (maturity >= I(tau)).
    double live_notional(const TenorGrid& grid, double tau) const;
    /// Sum of notional * spread of legs alive at tau.
    double live_spread_notional(const TenorGrid& grid, double tau) const;
    double survived_pv(const TenorGrid& grid) const;
    int last_maturity() const;
};

/// β + α^Old Δ^Old + Σ α_p Δ_p with the hedge held in the sign convention of
/// its side. The illiquid notional is used as given.
Position hedged_position(const CdsSpec& illiquid, std::span<const MarketQuote> quotes,
                         const HedgePortfolio& hedge);

double portfolio_pv(const TenorGrid& grid, const CdsSpec& illiquid,
                    std::span<const MarketQuote> quotes, const HedgePortfolio& hedge,
                    const DefaultScenario& scenario);

/// Grid with N = max(longest quote maturity, illiquid maturity).
TenorGrid grid_for(const CdsSpec& illiquid, std::span<const MarketQuote> quotes,
                   double risk_free_rate, double quarter_length = 0.25);

} // namespace cdsbounds
