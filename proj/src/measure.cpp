#include "cdsbounds/measure.hpp"

#include "cdsbounds/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace cdsbounds {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

struct TruncatedParts {
    double a, b, z;
};

TruncatedParts truncation(const TruncatedNormal& t) {
    const double a = -t.location / t.scale;
    const double b = (1.0 - t.location) / t.scale;
    return {a, b, boost::math::cdf(kStdNormal, b) - boost::math::cdf(kStdNormal, a)};
}

void require_rho(double rho) {
    CDSB_REQUIRE(rho >= 0.0 && rho <= 1.0, "recovery must lie in [0, 1]");
}

} // namespace

RecoveryDensity::RecoveryDensity(Spec spec) : spec_(std::move(spec)) {
    if (const auto* t = std::get_if<TruncatedNormal>(&spec_)) {
        CDSB_REQUIRE(t->scale > 0.0, "truncated normal scale must be positive");
        const auto [a, b, z] = truncation(*t);
        CDSB_REQUIRE(z > 0.0, "truncated normal has no mass on [0, 1]");
        norm_ = z;
        mean_ = t->location +
                t->scale * (boost::math::pdf(kStdNormal, a) - boost::math::pdf(kStdNormal, b)) / z;
    } else if (const auto* p = std::get_if<TwoPoint>(&spec_)) {
        require_rho(p->rho_a);
        require_rho(p->rho_b);
        CDSB_REQUIRE(p->weight >= 0.0 && p->weight <= 1.0, "two-point weight must lie in [0, 1]");
        mean_ = p->weight * p->rho_a + (1.0 - p->weight) * p->rho_b;
    } else {
        const auto& tab = std::get<Tabulated>(spec_);
        CDSB_REQUIRE(tab.grid.size() >= 2 && tab.grid.size() == tab.values.size(),
                     "tabulated recovery needs matching grid and values");
        CDSB_REQUIRE(tab.grid.front() == 0.0 && tab.grid.back() == 1.0,
                     "tabulated recovery grid must span [0, 1]");
        cum_.assign(tab.grid.size(), 0.0);
        double first_moment = 0.0;
        for (std::size_t i = 1; i < tab.grid.size(); ++i) {
            const double x0 = tab.grid[i - 1], x1 = tab.grid[i];
            const double f0 = tab.values[i - 1], f1 = tab.values[i];
            CDSB_REQUIRE(x1 > x0, "tabulated recovery grid must be increasing");
            CDSB_REQUIRE(f0 >= 0.0 && f1 >= 0.0, "tabulated recovery density must be >= 0");
            const double h = x1 - x0;
            cum_[i] = cum_[i - 1] + 0.5 * h * (f0 + f1);
            first_moment += h / 6.0 * (x0 * (2.0 * f0 + f1) + x1 * (f0 + 2.0 * f1));
        }
        norm_ = cum_.back();
        CDSB_REQUIRE(norm_ > 0.0, "tabulated recovery density has no mass");
        mean_ = first_moment / norm_;
    }
}

double RecoveryDensity::density(double rho) const {
    require_rho(rho);
    if (const auto* t = std::get_if<TruncatedNormal>(&spec_))
        return boost::math::pdf(kStdNormal, (rho - t->location) / t->scale) / (t->scale * norm_);
    if (is_discrete())
        throw ArgumentError("a two-point recovery distribution has no density");
    const auto& tab = std::get<Tabulated>(spec_);
    const auto it = std::upper_bound(tab.grid.begin(), tab.grid.end(), rho);
    const std::size_t i = std::clamp<std::size_t>(
        static_cast<std::size_t>(it - tab.grid.begin()), 1, tab.grid.size() - 1);
    const double x0 = tab.grid[i - 1], x1 = tab.grid[i];
    const double f = tab.values[i - 1] + (tab.values[i] - tab.values[i - 1]) * (rho - x0) / (x1 - x0);
    return f / norm_;
}

double RecoveryDensity::cdf(double rho) const {
    if (rho < 0.0)
        return 0.0;
    if (rho >= 1.0)
        return 1.0;
    if (const auto* t = std::get_if<TruncatedNormal>(&spec_)) {
        const auto parts = truncation(*t);
        return (boost::math::cdf(kStdNormal, (rho - t->location) / t->scale) -
                boost::math::cdf(kStdNormal, parts.a)) /
               norm_;
    }
    if (const auto* p = std::get_if<TwoPoint>(&spec_))
        return (rho >= p->rho_a ? p->weight : 0.0) + (rho >= p->rho_b ? 1.0 - p->weight : 0.0);
    const auto& tab = std::get<Tabulated>(spec_);
    const auto it = std::upper_bound(tab.grid.begin(), tab.grid.end(), rho);
    const std::size_t i = static_cast<std::size_t>(it - tab.grid.begin());
    const double x0 = tab.grid[i - 1], x1 = tab.grid[i];
    const double f0 = tab.values[i - 1];
    const double fx = f0 + (tab.values[i] - f0) * (rho - x0) / (x1 - x0);
    return (cum_[i - 1] + 0.5 * (rho - x0) * (f0 + fx)) / norm_;
}

std::vector<std::pair<double, double>> RecoveryDensity::atoms() const {
    if (const auto* p = std::get_if<TwoPoint>(&spec_))
        return {{p->rho_a, p->weight}, {p->rho_b, 1.0 - p->weight}};
    return {};
}

std::string RecoveryDensity::describe() const {
    if (const auto* t = std::get_if<TruncatedNormal>(&spec_))
        return fmt::format("truncated_normal(loc={}, scale={})", t->location, t->scale);
    if (const auto* p = std::get_if<TwoPoint>(&spec_))
        return fmt::format("two_point({}, {}, w={})", p->rho_a, p->rho_b, p->weight);
    return fmt::format("tabulated({} nodes)", std::get<Tabulated>(spec_).grid.size());
}

RecoveryDensity recovery_a() { return RecoveryDensity(TruncatedNormal{0.15, 0.16}); }
RecoveryDensity recovery_b() { return RecoveryDensity(TruncatedNormal{0.224, 0.16}); }
RecoveryDensity recovery_c() { return RecoveryDensity(TruncatedNormal{0.396, 0.16}); }

double hazard_from_pd1(double pd1) {
    CDSB_REQUIRE(pd1 >= 0.0 && pd1 < 1.0, "one-year default probability must lie in [0, 1)");
    return -std::log1p(-pd1);
}

double PhysicalMeasure::default_density(double tau) const {
    return tau < 0.0 ? 0.0 : hazard * std::exp(-hazard * tau);
}

double PhysicalMeasure::default_probability(double t) const {
    return t <= 0.0 ? 0.0 : -std::expm1(-hazard * t);
}

PhysicalMeasure make_measure(double pd1, double horizon, RecoveryDensity recovery) {
    CDSB_REQUIRE(horizon > 0.0, "measure horizon must be positive");
    return {hazard_from_pd1(pd1), horizon, std::move(recovery)};
}

double survival_mass(const PhysicalMeasure& measure) {
    return std::exp(-measure.hazard * measure.horizon);
}

ScenarioSampler::ScenarioSampler(const PhysicalMeasure& measure, std::uint64_t seed)
    : measure_(measure), engine_(seed) {
    CDSB_REQUIRE(measure.hazard >= 0.0, "hazard rate must be non-negative");
    if (!measure_.recovery.is_discrete()) {
        cdf_table_.resize(kTableSize);
        for (int j = 0; j < kTableSize; ++j)
            cdf_table_[static_cast<std::size_t>(j)] =
                measure_.recovery.cdf(static_cast<double>(j) / (kTableSize - 1));
        cdf_table_.back() = 1.0;
    }
}

double ScenarioSampler::uniform() {
    ++draws_;
    // 53 random bits mapped into the open interval (0, 1); identical on every
    // standard library
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double ScenarioSampler::recovery_quantile(double u) const {
    if (measure_.recovery.is_discrete()) {
        const auto atoms = measure_.recovery.atoms();
        return u < atoms[0].second ? atoms[0].first : atoms[1].first;
    }
    const auto it = std::lower_bound(cdf_table_.begin(), cdf_table_.end(), u);
    const std::size_t j = std::clamp<std::size_t>(
        static_cast<std::size_t>(it - cdf_table_.begin()), 1, cdf_table_.size() - 1);
    const double c0 = cdf_table_[j - 1], c1 = cdf_table_[j];
    const double step = 1.0 / (kTableSize - 1);
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return std::clamp((static_cast<double>(j - 1) + frac) * step, 0.0, 1.0);
}

DefaultScenario ScenarioSampler::next() {
    const double u = uniform();
    if (measure_.hazard <= 0.0)
        return DefaultScenario::survived();
    const double tau = -std::log1p(-u) / measure_.hazard;
    if (tau > measure_.horizon)
        return DefaultScenario::survived();
    return DefaultScenario::default_at(tau, recovery_quantile(uniform()));
}

} // namespace cdsbounds
