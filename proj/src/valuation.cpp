#include "cdsbounds/valuation.hpp"

#include "cdsbounds/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdsbounds {

namespace {

using boost::math::quadrature::gauss;

constexpr double kBisectionTol = 1e-12;
constexpr double kZeroNotional = 1e-9;

// On (t0, t1] the position's PV is C + ((1−ρ)n − a·s)·e^{−rτ}, s = τ − t0.
struct Segment {
    double t0 = 0.0, t1 = 0.0, r = 0.0;
    double C = 0.0; // deposit and premiums already paid
    double n = 0.0; // live protection notional
    double a = 0.0; // live notional × spread

    double value(double tau, double rho) const {
        return C + ((1.0 - rho) * n - a * (tau - t0)) * std::exp(-r * tau);
    }
    double slope(double tau, double rho) const {
        const double c0 = (1.0 - rho) * n - a * (tau - t0);
        return std::exp(-r * tau) * (-a - r * c0);
    }
    // Stationary point of value(·, rho) strictly inside the segment.
    std::optional<double> critical(double rho) const {
        if (r * a == 0.0)
            return std::nullopt;
        const double s = (a + r * (1.0 - rho) * n) / (r * a);
        const double tau = t0 + s;
        if (tau > t0 && tau < t1)
            return tau;
        return std::nullopt;
    }
};

std::vector<Segment> segments_of(const TenorGrid& grid, const Position& position) {
    std::vector<Segment> out;
    out.reserve(static_cast<std::size_t>(grid.size()));
    for (int i = 1; i <= grid.size(); ++i) {
        Segment seg;
        seg.t0 = grid.time(i - 1);
        seg.t1 = grid.time(i);
        seg.r = grid.risk_free_rate();
        seg.C = position.deposit;
        for (const auto& leg : position.legs) {
            const int paid = std::min(i - 1, leg.maturity_index);
            for (int k = 1; k <= paid; ++k)
                seg.C -= leg.notional * premium_payment(grid, leg, k);
            if (i <= leg.maturity_index) {
                seg.n += leg.notional;
                seg.a += leg.notional * leg.spread;
            }
        }
        out.push_back(seg);
    }
    return out;
}

void require_matching_horizon(const TenorGrid& grid, const PhysicalMeasure& measure) {
    CDSB_REQUIRE(std::abs(measure.horizon - grid.horizon()) <= 1e-12,
                 "measure horizon must equal the grid horizon");
}

// Recovery levels that carry the ρ-dependence of a curve family: the two
// extremes for a density, the atoms for a discrete law.
struct Branch {
    double rho;
    double weight;
};

// Ordered breakpoints of `seg` at which every branch curve is monotone between.
std::vector<double> monotone_breaks(const Segment& seg, std::span<const double> rhos) {
    std::vector<double> b{seg.t0, seg.t1};
    for (double rho : rhos)
        if (auto c = seg.critical(rho))
            b.push_back(*c);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

// {τ in [lo, hi] : g(τ) >= 0} for g monotone on [lo, hi].
template <class G>
std::optional<std::pair<double, double>> nonneg_set(G g, double lo, double hi) {
    const double glo = g(lo), ghi = g(hi);
    if (glo >= 0.0 && ghi >= 0.0)
        return std::pair{lo, hi};
    if (glo < 0.0 && ghi < 0.0)
        return std::nullopt;
    double a = lo, b = hi;
    const bool rising = ghi >= 0.0;
    for (int it = 0; it < 200 && b - a > kBisectionTol; ++it) {
        const double m = 0.5 * (a + b);
        if ((g(m) >= 0.0) == rising)
            b = m;
        else
            a = m;
    }
    return rising ? std::pair{b, hi} : std::pair{lo, a};
}

// Root of f(τ) = y on [lo, hi] where f is monotone and brackets y.
template <class F>
double monotone_root(F f, double y, double lo, double hi) {
    const bool rising = f(hi) >= f(lo);
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > kBisectionTol; ++it) {
        const double m = 0.5 * (a + b);
        if ((f(m) >= y) == rising)
            b = m;
        else
            a = m;
    }
    return 0.5 * (a + b);
}

struct Piece {
    double lo, hi;
};

struct Family {
    Segment seg;
    bool two_d = false;            // density in ρ integrated along τ
    std::vector<Branch> branches;  // one-dimensional curves otherwise
    std::vector<Piece> pieces;
    double vmin = 0.0, vmax = 0.0; // Δ range of the family on the segment
};

double tail_mass(double h, double a, double b) {
    return std::exp(-h * a) - std::exp(-h * b);
}

void merge_atoms(std::vector<Atom>& atoms) {
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& x, const Atom& y) { return x.location < y.location; });
    std::vector<Atom> out;
    for (const auto& a : atoms) {
        if (a.mass <= 0.0)
            continue;
        if (!out.empty() &&
            std::abs(out.back().location - a.location) <= 1e-12 * std::max(1.0, std::abs(a.location))) {
            out.back().mass += a.mass;
            out.back().survival_mass += a.survival_mass;
        } else {
            out.push_back(a);
        }
    }
    atoms = std::move(out);
}

// Mass and first moment of the piecewise-linear continuous part up to x.
std::pair<double, double> partial_moments(const DensityCurve& c, double x) {
    double mass = 0.0, moment = 0.0;
    const auto& g = c.abscissae;
    const auto& f = c.values;
    for (std::size_t k = 1; k < g.size(); ++k) {
        const double x0 = g[k - 1];
        if (x <= x0)
            break;
        const double x1 = std::min(g[k], x);
        const double f0 = f[k - 1];
        const double f1 = f[k - 1] + (f[k] - f[k - 1]) * (x1 - x0) / (g[k] - x0);
        const double w = x1 - x0;
        mass += 0.5 * w * (f0 + f1);
        moment += w / 6.0 * (x0 * (2.0 * f0 + f1) + x1 * (f0 + 2.0 * f1));
    }
    return {mass, moment};
}

} // namespace

double DensityCurve::atom_mass() const {
    double m = 0.0;
    for (const auto& a : atoms)
        m += a.mass;
    return m;
}

double DensityCurve::continuous_mass() const {
    return partial_moments(*this, std::numeric_limits<double>::infinity()).first;
}

double DensityCurve::first_moment() const {
    double m = partial_moments(*this, std::numeric_limits<double>::infinity()).second;
    for (const auto& a : atoms)
        m += a.location * a.mass;
    return m;
}

double mean_pv(const TenorGrid& grid, const Position& position, const PhysicalMeasure& measure,
               MeanOptions options) {
    require_matching_horizon(grid, measure);
    const auto& rec = measure.recovery;
    const double rho_bar = rec.mean();
    const auto pv_at = [&](double tau, double rho) {
        return position.pv(grid, DefaultScenario::default_at(tau, rho));
    };
    const auto rho_average = [&](double tau) {
        if (!options.full_2d)
            return pv_at(tau, rho_bar);
        if (rec.is_discrete()) {
            double s = 0.0;
            for (const auto& [rho, p] : rec.atoms())
                s += p * pv_at(tau, rho);
            return s;
        }
        return gauss<double, 16>::integrate(
            [&](double rho) { return pv_at(tau, rho) * rec.density(rho); }, 0.0, 1.0);
    };

    double total = 0.0;
    for (int i = 1; i <= grid.size(); ++i)
        total += gauss<double, 16>::integrate(
            [&](double tau) { return measure.default_density(tau) * rho_average(tau); },
            grid.time(i - 1), grid.time(i));
    return total + survival_mass(measure) * position.survived_pv(grid);
}

DensityCurve density(const TenorGrid& grid, const Position& position,
                     const PhysicalMeasure& measure, const DensityOptions& options) {
    require_matching_horizon(grid, measure);
    const double h = measure.hazard;
    const auto& rec = measure.recovery;

    DensityCurve out;
    const double delta0 = position.survived_pv(grid);
    out.atoms.push_back({delta0, survival_mass(measure), survival_mass(measure)});
    double vmin = delta0, vmax = delta0;

    std::vector<Family> families;
    if (h > 0.0) {
        for (const auto& seg : segments_of(grid, position)) {
            Family fam;
            fam.seg = seg;
            if (rec.is_discrete()) {
                for (const auto& [rho, p] : rec.atoms())
                    fam.branches.push_back({rho, p});
            } else if (std::abs(seg.n) <= kZeroNotional) {
                fam.branches.push_back({rec.mean(), 1.0});
            } else {
                fam.two_d = true;
            }
            std::vector<double> rhos;
            if (fam.two_d)
                rhos = {0.0, 1.0};
            for (const auto& b : fam.branches)
                rhos.push_back(b.rho);
            const auto breaks = monotone_breaks(seg, rhos);
            for (std::size_t k = 1; k < breaks.size(); ++k)
                fam.pieces.push_back({breaks[k - 1], breaks[k]});

            fam.vmin = std::numeric_limits<double>::infinity();
            fam.vmax = -fam.vmin;
            for (double t : breaks)
                for (double rho : rhos) {
                    fam.vmin = std::min(fam.vmin, seg.value(t, rho));
                    fam.vmax = std::max(fam.vmax, seg.value(t, rho));
                }

            // a branch that does not move with τ is a point mass
            const double scale = std::max(1.0, std::abs(seg.C));
            std::vector<Branch> moving;
            for (const auto& b : fam.branches) {
                double lo = seg.value(breaks.front(), b.rho), hi = lo;
                for (double t : breaks) {
                    lo = std::min(lo, seg.value(t, b.rho));
                    hi = std::max(hi, seg.value(t, b.rho));
                }
                if (hi - lo <= 1e-13 * scale)
                    out.atoms.push_back(
                        {0.5 * (lo + hi), b.weight * tail_mass(h, seg.t0, seg.t1), 0.0});
                else
                    moving.push_back(b);
            }
            fam.branches = std::move(moving);
            vmin = std::min(vmin, fam.vmin);
            vmax = std::max(vmax, fam.vmax);
            families.push_back(std::move(fam));
        }
    }
    merge_atoms(out.atoms);

    if (!options.abscissae.empty()) {
        out.abscissae = options.abscissae;
        CDSB_REQUIRE(std::is_sorted(out.abscissae.begin(), out.abscissae.end()),
                     "density abscissae must be sorted");
    } else {
        CDSB_REQUIRE(options.grid_size >= 2, "density grid needs at least two points");
        CDSB_REQUIRE(options.margin >= 0.0, "density margin must be non-negative");
        double range = vmax - vmin;
        if (range <= 0.0)
            range = 1e-3 * std::max(1.0, std::abs(vmin));
        const double lo = vmin - options.margin * range;
        const double hi = vmax + options.margin * range;
        out.abscissae.resize(static_cast<std::size_t>(options.grid_size));
        for (int k = 0; k < options.grid_size; ++k)
            out.abscissae[static_cast<std::size_t>(k)] =
                lo + (hi - lo) * static_cast<double>(k) / (options.grid_size - 1);
    }
    out.values.assign(out.abscissae.size(), 0.0);

    if (out.abscissae.size() >= 2) {
        const double spacing = (out.abscissae.back() - out.abscissae.front()) /
                               static_cast<double>(out.abscissae.size() - 1);
        for (const auto& fam : families)
            if ((fam.two_d || !fam.branches.empty()) && fam.vmax - fam.vmin < spacing)
                out.under_resolved = true;
    }

    const double r = grid.risk_free_rate();
    for (std::size_t k = 0; k < out.abscissae.size(); ++k) {
        const double y = out.abscissae[k];
        double g = 0.0;
        for (const auto& fam : families) {
            if (y < fam.vmin || y > fam.vmax)
                continue;
            const Segment& seg = fam.seg;
            if (fam.two_d) {
                const double lo_rho = seg.n > 0.0 ? 1.0 : 0.0; // branch giving the smaller Δ
                const double hi_rho = 1.0 - lo_rho;
                const double inv_n = 1.0 / std::abs(seg.n);
                for (const auto& pc : fam.pieces) {
                    const auto below = nonneg_set(
                        [&](double t) { return y - seg.value(t, lo_rho); }, pc.lo, pc.hi);
                    if (!below)
                        continue;
                    const auto above = nonneg_set(
                        [&](double t) { return seg.value(t, hi_rho) - y; }, pc.lo, pc.hi);
                    if (!above)
                        continue;
                    const double a = std::max(below->first, above->first);
                    const double b = std::min(below->second, above->second);
                    if (b <= a)
                        continue;
                    g += gauss<double, 32>::integrate(
                        [&](double t) {
                            const double growth = std::exp(r * t);
                            const double loss = ((y - seg.C) * growth + seg.a * (t - seg.t0)) / seg.n;
                            const double rho = std::clamp(1.0 - loss, 0.0, 1.0);
                            return measure.default_density(t) * rec.density(rho) * growth * inv_n;
                        },
                        a, b);
                }
            } else {
                for (const auto& br : fam.branches)
                    for (const auto& pc : fam.pieces) {
                        const double fa = seg.value(pc.lo, br.rho);
                        const double fb = seg.value(pc.hi, br.rho);
                        if (y < std::min(fa, fb) || y >= std::max(fa, fb))
                            continue;
                        const double t = monotone_root(
                            [&](double s) { return seg.value(s, br.rho); }, y, pc.lo, pc.hi);
                        const double d = std::abs(seg.slope(t, br.rho));
                        if (d > 0.0)
                            g += br.weight * measure.default_density(t) / d;
                    }
            }
        }
        out.values[k] = g;
    }

    out.support_min = vmin;
    out.support_max = vmax;
    return out;
}

PvSamples simulate_pv(const TenorGrid& grid, const Position& position,
                      const PhysicalMeasure& measure, std::size_t n_samples, std::uint64_t seed) {
    CDSB_REQUIRE(n_samples >= 1, "at least one sample is needed");
    require_matching_horizon(grid, measure);
    ScenarioSampler sampler(measure, seed);
    PvSamples out;
    out.survived_value = position.survived_pv(grid);
    out.defaulted.reserve(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const auto s = sampler.next();
        if (s.defaulted)
            out.defaulted.push_back(position.pv(grid, s));
        else
            ++out.survived;
    }
    return out;
}

DensityCurve density_mc_oracle(const TenorGrid& grid, const Position& position,
                               const PhysicalMeasure& measure, std::size_t n_samples,
                               std::uint64_t seed, int bins) {
    CDSB_REQUIRE(bins >= 1, "histogram needs at least one bin");
    return histogram_density(simulate_pv(grid, position, measure, n_samples, seed), bins);
}

DensityCurve histogram_density(const PvSamples& samples, int bins) {
    CDSB_REQUIRE(bins >= 1, "histogram needs at least one bin");
    const double n = static_cast<double>(samples.size());

    DensityCurve out;
    out.support_min = out.support_max = samples.survived_value;
    if (samples.survived > 0) {
        const double m = static_cast<double>(samples.survived) / n;
        out.atoms.push_back({samples.survived_value, m, m});
    }
    if (samples.defaulted.empty())
        return out;

    const auto [mn, mx] = std::minmax_element(samples.defaulted.begin(), samples.defaulted.end());
    const double lo = *mn;
    const double hi = *mx > *mn ? *mx : *mn + 1e-9;
    out.support_min = std::min(out.support_min, lo);
    out.support_max = std::max(out.support_max, *mx);
    const double width = (hi - lo) / bins;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double x : samples.defaulted) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        counts[std::min(b, counts.size() - 1)] += 1.0;
    }
    out.abscissae.resize(counts.size());
    out.values.resize(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) {
        out.abscissae[b] = lo + (static_cast<double>(b) + 0.5) * width;
        out.values[b] = counts[b] / (n * width);
    }
    return out;
}

double ks_distance(const DensityCurve& curve, const PvSamples& samples) {
    CDSB_REQUIRE(!samples.defaulted.empty(), "no defaulted samples to compare");
    std::vector<Atom> atoms;
    double default_mass = curve.continuous_mass();
    for (const auto& a : curve.atoms) {
        const double m = a.mass - a.survival_mass;
        if (m > 0.0) {
            atoms.push_back({a.location, m, 0.0});
            default_mass += m;
        }
    }
    CDSB_REQUIRE(default_mass > 0.0, "curve carries no default mass");

    // cumulative continuous mass at each abscissa
    const auto& g = curve.abscissae;
    const auto& f = curve.values;
    std::vector<double> cum(g.size(), 0.0);
    for (std::size_t k = 1; k < g.size(); ++k)
        cum[k] = cum[k - 1] + 0.5 * (g[k] - g[k - 1]) * (f[k - 1] + f[k]);
    const auto continuous_cdf = [&](double x) {
        if (g.size() < 2 || x <= g.front())
            return 0.0;
        if (x >= g.back())
            return cum.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin());
        const double x0 = g[k - 1];
        const double fx = f[k - 1] + (f[k] - f[k - 1]) * (x - x0) / (g[k] - x0);
        return cum[k - 1] + 0.5 * (x - x0) * (f[k - 1] + fx);
    };

    const auto cdf = [&](double x, bool inclusive) {
        double m = continuous_cdf(x);
        for (const auto& a : atoms)
            if (a.location < x || (inclusive && a.location == x))
                m += a.mass;
        return m / default_mass;
    };

    std::vector<double> xs = samples.defaulted;
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    std::size_t k = 0;
    while (k < xs.size()) {
        std::size_t e = k;
        while (e < xs.size() && xs[e] == xs[k])
            ++e;
        d = std::max(d, std::abs(cdf(xs[k], false) - static_cast<double>(k) / n));
        d = std::max(d, std::abs(cdf(xs[k], true) - static_cast<double>(e) / n));
        k = e;
    }
    return d;
}

DensityCurve scale_density(const DensityCurve& curve, double f) {
    CDSB_REQUIRE(f > 0.0, "scale factor must be positive");
    DensityCurve out = curve;
    for (auto& x : out.abscissae)
        x /= f;
    for (auto& v : out.values)
        v *= f;
    for (auto& a : out.atoms)
        a.location /= f;
    out.support_min /= f;
    out.support_max /= f;
    return out;
}

DensityCurve loss_density(const DensityCurve& curve, double lambda, double mean) {
    CDSB_REQUIRE(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
    const double shift = lambda * mean;
    DensityCurve out;
    out.under_resolved = curve.under_resolved;
    out.abscissae.assign(curve.abscissae.rbegin(), curve.abscissae.rend());
    for (auto& x : out.abscissae)
        x = shift - x;
    out.values.assign(curve.values.rbegin(), curve.values.rend());
    for (auto it = curve.atoms.rbegin(); it != curve.atoms.rend(); ++it)
        out.atoms.push_back({shift - it->location, it->mass, it->survival_mass});
    out.support_min = shift - curve.support_max;
    out.support_max = shift - curve.support_min;
    return out;
}

RiskSummary risk_summary(const DensityCurve& curve, double lambda, double mean, double loss_floor) {
    CDSB_REQUIRE(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
    CDSB_REQUIRE(loss_floor >= 0.0, "loss floor must be non-negative");
    RiskSummary out;
    out.mean_pv = mean;
    out.max_loss = lambda * mean;
    out.worst_loss = out.max_loss - curve.support_min;

    // L > floor  <=>  Δ < λΔ̄ − floor
    const double cut = out.max_loss - loss_floor;
    auto [p, m1] = partial_moments(curve, cut);
    for (const auto& a : curve.atoms)
        if (a.location < cut) {
            p += a.mass;
            m1 += a.mass * a.location;
        }
    out.loss_prob = p;
    if (p > 0.0)
        out.cond_loss = out.max_loss - m1 / p;
    return out;
}

double continuous_quantile(const DensityCurve& curve, double q) {
    CDSB_REQUIRE(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
    const auto& g = curve.abscissae;
    CDSB_REQUIRE(g.size() >= 2, "curve has no continuous part");
    const double total = curve.continuous_mass();
    CDSB_REQUIRE(total > 0.0, "curve has no continuous mass");
    const double target = q * total;
    double cum = 0.0;
    for (std::size_t k = 1; k < g.size(); ++k) {
        const double step = 0.5 * (g[k] - g[k - 1]) * (curve.values[k - 1] + curve.values[k]);
        if (cum + step >= target && step > 0.0)
            return g[k - 1] + (g[k] - g[k - 1]) * (target - cum) / step;
        cum += step;
    }
    return g.back();
}

double interquantile_spread(const DensityCurve& curve, double lo, double hi) {
    CDSB_REQUIRE(lo < hi, "quantile levels must be ordered");
    return continuous_quantile(curve, hi) - continuous_quantile(curve, lo);
}

} // namespace cdsbounds
