#pragma once

// Physical measure: constant-hazard default times and an independent
// recovery-rate distribution on [0, 1].

#include "cdsbounds/market_model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace cdsbounds {

/// Normal density restricted to [0, 1] and renormalized.
struct TruncatedNormal {
    double location = 0.15;
    double scale = 0.16;
};

/// Recovery rho_a with probability `weight`, rho_b otherwise.
struct TwoPoint {
    double rho_a = 0.0;
    double rho_b = 1.0;
    double weight = 0.5;
};

/// Piecewise-linear density through (grid, values); normalized on use.
struct Tabulated {
    std::vector<double> grid;
    std::vector<double> values;
};

class RecoveryDensity {
  public:
    using Spec = std::variant<TruncatedNormal, TwoPoint, Tabulated>;

    explicit RecoveryDensity(Spec spec);

    const Spec& spec() const { return spec_; }
    bool is_discrete() const { return std::holds_alternative<TwoPoint>(spec_); }

    /// γ(ρ); throws for a two-point distribution, which has no density.
    double density(double rho) const;
    double cdf(double rho) const;
    double mean() const { return mean_; }
    /// (location, probability) of each atom of a discrete distribution.
    std::vector<std::pair<double, double>> atoms() const;

    std::string describe() const;

  private:
    Spec spec_;
    double norm_ = 1.0;
    double mean_ = 0.0;
    std::vector<double> cum_; // tabulated: cumulative mass at grid nodes
};

/// The three recovery densities used for the robustness study: normal shapes
/// with locations 0.15, 0.224 and 0.396 and scale 0.16, truncated to [0, 1].
RecoveryDensity recovery_a();
RecoveryDensity recovery_b();
RecoveryDensity recovery_c();

double hazard_from_pd1(double pd1);

struct PhysicalMeasure {
    double hazard = 0.0;
    double horizon = 0.0;
    RecoveryDensity recovery{TruncatedNormal{}};

    /// Υ(τ) = h e^{−hτ}
    double default_density(double tau) const;
    /// P(τ <= t)
    double default_probability(double t) const;
};

PhysicalMeasure make_measure(double pd1, double horizon, RecoveryDensity recovery);

/// Υ_0 = e^{−h T_N}
double survival_mass(const PhysicalMeasure& measure);

/// Seeded scenario generator. τ is exponential(h) and reported as survived
/// beyond the horizon; ρ is drawn independently by inverting a 4096-point
/// tabulated CDF.
class ScenarioSampler {
  public:
    static constexpr int kTableSize = 4096;

    ScenarioSampler(const PhysicalMeasure& measure, std::uint64_t seed);

    DefaultScenario next();
    std::uint64_t draws() const { return draws_; }

    /// Inverse of the tabulated recovery CDF at u in [0, 1).
    double recovery_quantile(double u) const;

  private:
    double uniform();

    PhysicalMeasure measure_;
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
    std::vector<double> cdf_table_;
};

} // namespace cdsbounds
