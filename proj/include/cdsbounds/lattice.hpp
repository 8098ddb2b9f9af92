#pragma once

// Corner-state discretization of the constraint "Δ(τ,ρ) ≥ 0 for all τ, ρ".
//
// Within each payment interval (T_{i-1}, T_i] the discount factor inside the
// default payment is frozen at the interval midpoint, which makes Δ affine in
// (τ, ρ) there; non-negativity at the four corners then implies it on the
// whole rectangle. Premium payments keep their exact discount factors.

#include "cdsbounds/market_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>

namespace cdsbounds {

inline constexpr int kCorners = 4;
/// Stand-in for the 0⁺ offset of the left corners, in years.
inline constexpr double kEpsilonTau = 1e-9;

struct ConstraintSystem {
    Eigen::MatrixXd B; ///< (N·J+1) × (K+1), last column all ones
    Eigen::VectorXd b; ///< illiquid CDS (unit long) in each state
    Eigen::VectorXd c; ///< [u_1 .. u_K, 1]
    Side side = Side::lub;
    int quarters = 0;
    int quotes = 0;

    Eigen::Index rows() const { return B.rows(); }
    Eigen::Index survived_row() const { return B.rows() - 1; }
};

/// Corner states j = 1..4 of interval i, in the order
/// (T_{i-1}+0⁺, 0), (T_i, 0), (T_{i-1}+0⁺, 1), (T_i, 1).
std::array<DefaultScenario, kCorners> corner_states(const TenorGrid& grid, int i);

/// Zero-based row of corner j (1..4) of interval i (1..N).
inline Eigen::Index row_index(int i, int j) { return kCorners * (i - 1) + (j - 1); }

/// Per-unit PV of `cds` in a discretized state: exact premium leg, default
/// payment discounted at the midpoint of the default interval.
double discretized_pv(const TenorGrid& grid, const CdsSpec& cds, const DefaultScenario& state);

/// Discretized 𝒯_M(τ), consistent with discretized_pv.
double discretized_annuity(const TenorGrid& grid, int maturity_index, const DefaultScenario& state);

/// Builds (B, b, c) for a unit-notional illiquid CDS. The sign of the
/// illiquid notional is ignored; `side` selects the constraint sense.
ConstraintSystem build_system(const TenorGrid& grid, const CdsSpec& illiquid,
                              std::span<const MarketQuote> quotes, Side side);

/// Largest |exact − midpoint| default-payment discount error per unit loss on this grid.
inline double midpoint_error_bound(const TenorGrid& grid) {
    return 0.5 * grid.risk_free_rate() * grid.quarter_length();
}

} // namespace cdsbounds
