#pragma once

// Distribution of the realized PV Δ of a static position under the physical
// measure: its mean, its density (continuous part plus point masses), a Monte
// Carlo cross-check and loss-side risk measures.

#include "cdsbounds/market_model.hpp"
#include "cdsbounds/measure.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cdsbounds {

struct Atom {
    double location = 0.0;
    double mass = 0.0;
    /// Part of `mass` from paths with no default (the Δ_0 atom).
    double survival_mass = 0.0;
};

/// Γ(Δ) = Γ_1(Δ) on `abscissae` plus point masses.
struct DensityCurve {
    std::vector<double> abscissae;
    std::vector<double> values;
    std::vector<Atom> atoms;
    /// Some interval's support is narrower than the grid spacing.
    bool under_resolved = false;
    /// Smallest and largest Δ carrying probability.
    double support_min = 0.0;
    double support_max = 0.0;

    double atom_mass() const;
    /// Trapezoid integral of the continuous part.
    double continuous_mass() const;
    double total_mass() const { return continuous_mass() + atom_mass(); }
    /// ∫Δ Γ_1 dΔ + Σ location·mass
    double first_moment() const;
};

struct MeanOptions {
    /// Integrate ρ by 16-node Gauss–Legendre instead of collapsing to ρ̄.
    bool full_2d = false;
};

/// Δ̄ with exact discounting, 16-node Gauss–Legendre in τ per interval.
double mean_pv(const TenorGrid& grid, const Position& position, const PhysicalMeasure& measure,
               MeanOptions options = {});

struct DensityOptions {
    int grid_size = 2001;
    double margin = 0.01; ///< fraction of the Δ range added on each side
    /// Evaluate on these abscissae instead of the automatic grid.
    std::vector<double> abscissae;
};

DensityCurve density(const TenorGrid& grid, const Position& position,
                     const PhysicalMeasure& measure, const DensityOptions& options = {});

/// Pathwise PVs of sampled scenarios; survived paths are only counted.
struct PvSamples {
    std::vector<double> defaulted;
    std::size_t survived = 0;
    double survived_value = 0.0;

    std::size_t size() const { return defaulted.size() + survived; }
};

PvSamples simulate_pv(const TenorGrid& grid, const Position& position,
                      const PhysicalMeasure& measure, std::size_t n_samples, std::uint64_t seed);

/// Histogram of sampled PVs with `bins` equal bins over the defaulted range;
/// survived paths form the atom.
DensityCurve histogram_density(const PvSamples& samples, int bins);

/// simulate_pv followed by histogram_density.
DensityCurve density_mc_oracle(const TenorGrid& grid, const Position& position,
                               const PhysicalMeasure& measure, std::size_t n_samples,
                               std::uint64_t seed, int bins);

/// Kolmogorov–Smirnov distance between the default-conditioned CDFs of the
/// curve (continuous part and non-survival atoms) and of the samples.
double ks_distance(const DensityCurve& curve, const PvSamples& samples);

/// Curve of W/f from the curve of W for a position linear in W.
DensityCurve scale_density(const DensityCurve& curve, double f);

/// Γ_L(L) = Γ(λΔ̄ − L)
DensityCurve loss_density(const DensityCurve& curve, double lambda, double mean);

struct RiskSummary {
    double mean_pv = 0.0;
    double max_loss = 0.0;   ///< L_Max = λΔ̄
    double worst_loss = 0.0; ///< λΔ̄ − min Δ over the support
    std::optional<double> cond_loss;
    double loss_prob = 0.0;
};

/// Losses at or below `loss_floor` count as zero, which absorbs the
/// discretization slack of LP hedges (see midpoint_error_bound).
RiskSummary risk_summary(const DensityCurve& curve, double lambda, double mean,
                         double loss_floor = 0.0);

/// q-quantile of the normalized continuous part.
double continuous_quantile(const DensityCurve& curve, double q);

/// Width of the 1%–99% range of the normalized continuous part.
double interquantile_spread(const DensityCurve& curve, double lo = 0.01, double hi = 0.99);

} // namespace cdsbounds
