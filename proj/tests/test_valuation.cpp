#include "fixtures.hpp"

#include "cdsbounds/errors.hpp"
#include "cdsbounds/hedging.hpp"
#include "cdsbounds/valuation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace cdsbounds;
using doctest::Approx;

namespace {

PhysicalMeasure measure_a(double pd1 = 0.3) { return make_measure(pd1, 5.0, recovery_a()); }

Position long_cds() { return {0.0, {CdsSpec{20, 0.05, 1.0}}}; }

Position hedged(Side side, double bp = 100.0) {
    const auto g = fixtures::grid();
    const auto q = fixtures::quotes();
    const auto b = multi_cds_bounds(g, fixtures::illiquid(bp), q);
    return hedged_position(dealer_illiquid(fixtures::illiquid(bp), side), q,
                           side == Side::lub ? b.hedge_lub : b.hedge_glb);
}

Position plain_vanilla_glb() {
    const auto g = fixtures::grid();
    const auto q = fixtures::quotes();
    const auto b = plain_vanilla_bounds(g, fixtures::illiquid(), q[4]);
    return hedged_position(dealer_illiquid(fixtures::illiquid(), Side::glb), std::span(&q[4], 1),
                           b.hedge_glb);
}

Position scaled(const Position& p, double k) {
    Position out{k * p.deposit, p.legs};
    for (auto& l : out.legs)
        l.notional *= k;
    return out;
}

// E[Δ] by adaptive quadrature of the pathwise value, interval by interval
double oracle_mean(const TenorGrid& g, const Position& p, const PhysicalMeasure& m) {
    const double rho = m.recovery.mean();
    double total = survival_mass(m) * p.survived_pv(g);
    for (int i = 1; i <= g.size(); ++i) {
        auto f = [&](double t) {
            return m.default_density(t) * p.pv(g, DefaultScenario::default_at(t, rho));
        };
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, g.time(i - 1), g.time(i), 10, 1e-14);
    }
    return total;
}

} // namespace

TEST_CASE("mean of the realized PV") {
    const TenorGrid g = fixtures::grid();
    const auto m = measure_a();
    for (const auto& p : {long_cds(), hedged(Side::lub), hedged(Side::glb), plain_vanilla_glb()}) {
        const double mean = mean_pv(g, p, m);
        CHECK(mean == Approx(oracle_mean(g, p, m)).epsilon(1e-12));
        CHECK(mean_pv(g, p, m, {true}) == Approx(mean).epsilon(1e-12));
    }
    // regression values of the standard hedges
    CHECK(mean_pv(g, hedged(Side::lub), m) == Approx(0.0300111).epsilon(1e-6));
    CHECK(mean_pv(g, hedged(Side::glb), m) == Approx(0.0606001).epsilon(1e-6));

    SUBCASE("only the recovery mean matters") {
        const double rbar = recovery_a().mean();
        const auto same = make_measure(0.3, 5.0, RecoveryDensity(TwoPoint{0.0, 2.0 * rbar, 0.5}));
        for (const auto& p : {long_cds(), hedged(Side::lub)})
            CHECK(std::abs(mean_pv(g, p, same) - mean_pv(g, p, m)) <= 1e-12);
        const auto other = make_measure(0.3, 5.0, recovery_c());
        CHECK(mean_pv(g, long_cds(), other) < mean_pv(g, long_cds(), m));
    }
    SUBCASE("linear in the position") {
        const auto p = hedged(Side::glb);
        CHECK(mean_pv(g, scaled(p, 3.0), m) == Approx(3.0 * mean_pv(g, p, m)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(mean_pv(g, long_cds(), make_measure(0.3, 4.0, recovery_a())), ArgumentError);
}

TEST_CASE("density of a single long CDS") {
    const TenorGrid g = fixtures::grid();
    const auto m = measure_a();
    const auto c = density(g, long_cds(), m);
    CHECK(c.abscissae.size() == 2001);
    CHECK(c.total_mass() == Approx(1.0).epsilon(1e-3));
    CHECK(c.first_moment() == Approx(mean_pv(g, long_cds(), m)).epsilon(1e-3));
    REQUIRE_FALSE(c.atoms.empty());
    double survival = 0.0;
    for (const auto& a : c.atoms)
        survival += a.survival_mass;
    CHECK(survival == Approx(0.16807).epsilon(1e-9));
    const auto& atom = *std::find_if(c.atoms.begin(), c.atoms.end(),
                                     [](const Atom& a) { return a.survival_mass > 0.0; });
    CHECK(atom.location == Approx(-0.23731218441106697).epsilon(1e-12));
    CHECK(c.support_max == Approx(1.0).epsilon(1e-8));
    CHECK(c.support_min == Approx(-0.23731218441106697).epsilon(1e-9));
    for (double v : c.values)
        CHECK(v >= 0.0);
    CHECK_FALSE(c.under_resolved);

    const auto mc = simulate_pv(g, long_cds(), m, 200'000, 17);
    CHECK(ks_distance(c, mc) <= 0.01);
}

TEST_CASE("densities of hedged positions against simulation") {
    const TenorGrid g = fixtures::grid();
    const auto m = measure_a();
    for (const auto& p : {hedged(Side::lub), hedged(Side::glb), plain_vanilla_glb()}) {
        const auto c = density(g, p, m);
        CHECK(c.total_mass() == Approx(1.0).epsilon(1e-3));
        CHECK(c.first_moment() == Approx(mean_pv(g, p, m)).epsilon(2e-3));
        const auto mc = simulate_pv(g, p, m, 200'000, 23);
        CHECK(mc.size() == 200'000);
        CHECK(mc.survived_value == Approx(p.survived_pv(g)).epsilon(1e-14));
        CHECK(ks_distance(c, mc) <= 0.01);
        // bin heights at bin centres: exact mass is the bin sum
        const auto h = histogram_density(mc, 200);
        const double width = h.abscissae[1] - h.abscissae[0];
        double binned = h.atom_mass();
        for (double v : h.values)
            binned += v * width;
        CHECK(binned == Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("plain-vanilla density has no recovery dependence") {
    const TenorGrid g = fixtures::grid();
    const auto p = plain_vanilla_glb();
    const auto a = density(g, p, measure_a());
    const auto c = density(g, p, make_measure(0.3, 5.0, recovery_c()));
    REQUIRE(a.abscissae.size() == c.abscissae.size());
    for (std::size_t k = 0; k < a.abscissae.size(); ++k)
        CHECK(a.values[k] == Approx(c.values[k]).epsilon(1e-12));
    // Δ = W·𝒯(τ) on default, W·𝒯_0 on survival
    CHECK(a.support_min == Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(a.support_max == Approx(0.04 * annuity(g, 20, std::nullopt)).epsilon(1e-12));
}

TEST_CASE("two-point recovery density") {
    const TenorGrid g = fixtures::grid();
    const auto m = make_measure(0.3, 5.0, RecoveryDensity(TwoPoint{0.0, 0.4, 0.5}));
    const auto c = density(g, long_cds(), m);
    CHECK(c.total_mass() == Approx(1.0).epsilon(1e-3));
    CHECK(c.first_moment() == Approx(mean_pv(g, long_cds(), m)).epsilon(1e-3));
    CHECK(ks_distance(c, simulate_pv(g, long_cds(), m, 200'000, 4)) <= 0.01);
}

TEST_CASE("density scaling") {
    const TenorGrid g = fixtures::grid();
    const auto m = measure_a();
    const auto p = hedged(Side::glb);
    const auto base = density(g, p, m);
    for (double k : {0.5, 2.0, 4.0}) {
        CAPTURE(k);
        const auto s = scale_density(base, 1.0 / k);
        const auto direct = density(g, scaled(p, k), m, {0, 0.0, s.abscissae});
        double worst = 0.0, peak = 0.0;
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            worst = std::max(worst, std::abs(direct.values[i] - s.values[i]));
            peak = std::max(peak, s.values[i]);
        }
        CHECK(worst <= 1e-8 * std::max(1.0, peak));
        CHECK(s.total_mass() == Approx(base.total_mass()).epsilon(1e-12));
        REQUIRE(direct.atoms.size() == s.atoms.size());
        for (std::size_t a = 0; a < s.atoms.size(); ++a)
            CHECK(direct.atoms[a].location == Approx(s.atoms[a].location).epsilon(1e-12));
    }
    CHECK_THROWS_AS(scale_density(base, 0.0), ArgumentError);
}

TEST_CASE("loss distribution and risk summary") {
    const TenorGrid g = fixtures::grid();
    const auto m = measure_a();
    const auto p = hedged(Side::glb);
    const double mean = mean_pv(g, p, m);
    const auto c = density(g, p, m);
    const double lambda = 0.8;

    const auto loss = loss_density(c, lambda, mean);
    CHECK(loss.total_mass() == Approx(c.total_mass()).epsilon(1e-12));
    CHECK(loss.first_moment() == Approx(lambda * mean * c.total_mass() - c.first_moment()).epsilon(1e-10));
    CHECK(loss.support_max == Approx(lambda * mean - c.support_min).epsilon(1e-14));
    CHECK(std::is_sorted(loss.abscissae.begin(), loss.abscissae.end()));

    const auto r = risk_summary(c, lambda, mean);
    CHECK(r.max_loss == Approx(lambda * mean).epsilon(1e-15));
    CHECK(r.worst_loss == Approx(lambda * mean - c.support_min).epsilon(1e-15));
    CHECK(r.loss_prob > 0.0);
    CHECK(r.loss_prob < 1.0);
    REQUIRE(r.cond_loss.has_value());
    CHECK(*r.cond_loss > 0.0);
    CHECK(*r.cond_loss <= r.worst_loss);

    const auto floored = risk_summary(c, lambda, mean, 0.01);
    CHECK(floored.loss_prob <= r.loss_prob);
    // a floor beyond the worst loss removes every loss
    const auto none = risk_summary(c, lambda, mean, r.worst_loss + 1.0);
    CHECK(none.loss_prob == 0.0);
    CHECK_FALSE(none.cond_loss.has_value());
    CHECK_THROWS_AS(risk_summary(c, 1.5, mean), ArgumentError);
}

TEST_CASE("quantiles of the continuous part") {
    const TenorGrid g = fixtures::grid();
    const auto c = density(g, hedged(Side::lub), measure_a());
    double prev = -1e9;
    for (double q : {0.0, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0}) {
        const double x = continuous_quantile(c, q);
        CHECK(x >= prev);
        prev = x;
    }
    CHECK(interquantile_spread(c) > 0.0);
    CHECK(interquantile_spread(c) <= c.support_max - c.support_min);
    CHECK_THROWS_AS(interquantile_spread(c, 0.9, 0.1), ArgumentError);
    CHECK_THROWS_AS(continuous_quantile(c, 1.5), ArgumentError);
}

TEST_CASE("density options") {
    const TenorGrid g = fixtures::grid();
    const auto m = measure_a();
    CHECK_THROWS_AS(density(g, long_cds(), m, {1, 0.01, {}}), ArgumentError);
    CHECK_THROWS_AS(density(g, long_cds(), m, {11, -0.1, {}}), ArgumentError);
    CHECK_THROWS_AS(density(g, long_cds(), m, {0, 0.0, {0.5, 0.1}}), ArgumentError);
    const auto coarse = density(g, hedged(Side::lub), m, {11, 0.01, {}});
    CHECK(coarse.abscissae.size() == 11);
    CHECK(coarse.under_resolved);
    CHECK_THROWS_AS(histogram_density(PvSamples{}, 0), ArgumentError);
}
