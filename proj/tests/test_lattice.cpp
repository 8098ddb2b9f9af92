#include "fixtures.hpp"

#include "cdsbounds/errors.hpp"
#include "cdsbounds/lattice.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace cdsbounds;
using doctest::Approx;

TEST_CASE("corner states") {
    const TenorGrid g = fixtures::grid();
    const auto c = corner_states(g, 1);
    CHECK(c[0].tau == Approx(kEpsilonTau));
    CHECK(c[0].rho == 0.0);
    CHECK(c[1].tau == 0.25);
    CHECK(c[1].rho == 0.0);
    CHECK(c[2].tau == Approx(kEpsilonTau));
    CHECK(c[2].rho == 1.0);
    CHECK(c[3].tau == 0.25);
    CHECK(c[3].rho == 1.0);
    for (int i = 1; i <= g.size(); ++i) {
        const auto ci = corner_states(g, i);
        CHECK(ci[2].rho == 1.0);
        for (const auto& s : ci) {
            CHECK(s.defaulted);
            CHECK(g.interval_of(s.tau) == i);
        }
    }
    CHECK_THROWS_AS(corner_states(g, 0), ArgumentError);
    CHECK_THROWS_AS(corner_states(g, 21), ArgumentError);
}

TEST_CASE("row index is a bijection") {
    std::set<Eigen::Index> seen;
    for (int i = 1; i <= 20; ++i)
        for (int j = 1; j <= kCorners; ++j)
            seen.insert(row_index(i, j));
    CHECK(seen.size() == 80);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 79);
}

TEST_CASE("constraint system of the standard inputs") {
    const TenorGrid g = fixtures::grid();
    const auto q = fixtures::quotes();
    const auto sys = build_system(g, fixtures::illiquid(), q, Side::lub);
    CHECK(sys.B.rows() == 81);
    CHECK(sys.B.cols() == 6);
    CHECK(sys.b.size() == 81);
    CHECK(sys.c.size() == 6);
    CHECK((sys.B.col(5).array() == 1.0).all());
    for (int p = 0; p < 5; ++p)
        CHECK(sys.c(p) == q[static_cast<std::size_t>(p)].upfront);
    CHECK(sys.c(5) == 1.0);

    // survived row: pure premium legs
    for (int p = 0; p < 5; ++p) {
        const auto cds = as_cds(q[static_cast<std::size_t>(p)]);
        double legs = 0.0;
        for (int k = 1; k <= cds.maturity_index; ++k)
            legs += premium_payment(g, cds, k);
        CHECK(sys.B(sys.survived_row(), p) == Approx(-legs).epsilon(1e-14));
    }
    CHECK(sys.b(sys.survived_row()) == Approx(-0.01 * annuity(g, 20, std::nullopt)).epsilon(1e-14));

    // a market CDS is worth nothing after its maturity except its paid premiums
    const auto late = corner_states(g, 10);
    CHECK(sys.B(row_index(10, 1), 0) == Approx(sys.B(sys.survived_row(), 0)).epsilon(1e-15));
    CHECK(discretized_pv(g, as_cds(q[0]), late[0]) == sys.B(row_index(10, 1), 0));

    const auto glb = build_system(g, fixtures::illiquid(), q, Side::glb);
    CHECK(glb.side == Side::glb);
    CHECK((glb.B - sys.B).cwiseAbs().maxCoeff() == 0.0);
    CHECK((glb.b - sys.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_system errors") {
    const TenorGrid g(8, 0.02);
    const auto q = fixtures::quotes();
    CHECK_THROWS_AS(build_system(g, CdsSpec{8, 0.01, 1.0}, q, Side::lub), ArgumentError);
    const TenorGrid full = fixtures::grid();
    CHECK_THROWS_AS(build_system(full, CdsSpec{20, 0.01, 2.0}, q, Side::lub), ArgumentError);
    CHECK_NOTHROW(build_system(full, CdsSpec{20, 0.01, -1.0}, q, Side::lub));
}

TEST_CASE("rectangle sufficiency") {
    const TenorGrid g = fixtures::grid();
    const auto q = fixtures::quotes();
    const auto sys = build_system(g, fixtures::illiquid(), q, Side::lub);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);

    for (int trial = 0; trial < 50; ++trial) {
        const int i = 1 + static_cast<int>(u(rng) * 20.0) % 20;
        Eigen::VectorXd v(6);
        for (int p = 0; p < 5; ++p)
            v(p) = coef(rng);
        // smallest deposit making every corner of interval i non-negative
        double need = -std::numeric_limits<double>::infinity();
        for (int j = 1; j <= kCorners; ++j) {
            const auto r = row_index(i, j);
            need = std::max(need, sys.b(r) - sys.B.row(r).head(5).dot(v.head(5)));
        }
        v(5) = need;

        const CdsSpec old{20, 0.01, 1.0};
        for (int k = 0; k < 20; ++k) {
            const double tau = g.time(i - 1) + kEpsilonTau + u(rng) * (0.25 - kEpsilonTau);
            const auto s = DefaultScenario::default_at(tau, u(rng));
            double delta = v(5) - discretized_pv(g, old, s);
            for (int p = 0; p < 5; ++p)
                delta += v(p) * discretized_pv(g, as_cds(q[static_cast<std::size_t>(p)]), s);
            CHECK(delta >= -1e-12);
        }
    }
}

TEST_CASE("midpoint discounting error bound") {
    const TenorGrid g = fixtures::grid();
    const double bound = midpoint_error_bound(g);
    CHECK(bound == Approx(0.0025));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const CdsSpec cds{20, 0.05, 1.0};
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const auto s = DefaultScenario::default_at(1e-9 + u(rng) * 5.0, u(rng));
        worst = std::max(worst, std::abs(pathwise_pv(g, cds, s) - discretized_pv(g, cds, s)));
    }
    CHECK(worst <= bound);
    CHECK(worst > 0.0);
    // premiums are exact, so the survived row carries no error
    CHECK(discretized_pv(g, cds, DefaultScenario::survived()) ==
          pathwise_pv(g, cds, DefaultScenario::survived()));
}

TEST_CASE("discretized annuity") {
    const TenorGrid g = fixtures::grid();
    CHECK(discretized_annuity(g, 20, DefaultScenario::survived()) ==
          Approx(4.746243688221339).epsilon(1e-14));
    const auto c = corner_states(g, 3);
    // accrual at the right corner: two full quarters plus one discounted at the midpoint
    CHECK(discretized_annuity(g, 20, c[3]) ==
          Approx(annuity(g, 20, 0.5) + 0.25 * g.discount(0.625)).epsilon(1e-14));
    // recovery does not enter
    CHECK(discretized_annuity(g, 20, c[1]) == discretized_annuity(g, 20, c[3]));
}
