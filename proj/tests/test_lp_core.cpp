#include "fixtures.hpp"

#include "cdsbounds/hedging.hpp"
#include "cdsbounds/lp_core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cdsbounds;
using doctest::Approx;

namespace {

ConstraintSystem standard(Side side, double bp = 100.0) {
    return build_system(fixtures::grid(), fixtures::illiquid(bp), fixtures::quotes(), side);
}

// min c'v s.t. v1 >= 1, v2 >= 2, v1 + v2 >= 4
ConstraintSystem toy() {
    ConstraintSystem s;
    s.B.resize(3, 2);
    s.B << 1, 0, 0, 1, 1, 1;
    s.b.resize(3);
    s.b << 1, 2, 4;
    s.c.resize(2);
    s.c << 1, 3;
    s.side = Side::lub;
    return s;
}

} // namespace

TEST_CASE("toy problems") {
    SUBCASE("lub") {
        const auto s = solve(toy());
        REQUIRE(s.status == LpStatus::optimal);
        CHECK(s.objective == Approx(8.0).epsilon(1e-14));
        CHECK(s.variables(0) == Approx(2.0).epsilon(1e-14));
        CHECK(s.variables(1) == Approx(2.0).epsilon(1e-14));
        CHECK(check_duality(toy(), s).within({}));
    }
    SUBCASE("glb of the mirrored problem") {
        auto sys = toy();
        sys.B = -sys.B;
        sys.b = -sys.b;
        sys.side = Side::glb;
        // max c'v s.t. -Bv <= -b is the same feasible set with the opposite sense
        const auto s = solve(sys);
        CHECK(s.status == LpStatus::unbounded);
    }
    SUBCASE("unbounded lub") {
        auto sys = toy();
        sys.c(1) = -1.0;
        CHECK(solve(sys).status == LpStatus::unbounded);
    }
    SUBCASE("infeasible") {
        ConstraintSystem sys;
        sys.B.resize(2, 1);
        sys.B << 1, -1;
        sys.b.resize(2);
        sys.b << 2, -1; // v >= 2 and v <= 1
        sys.c.resize(1);
        sys.c << 1;
        CHECK(solve(sys).status == LpStatus::infeasible);
    }
}

TEST_CASE("published hedges") {
    const auto lub = solve(standard(Side::lub));
    const auto glb = solve(standard(Side::glb));
    REQUIRE(lub.status == LpStatus::optimal);
    REQUIRE(glb.status == LpStatus::optimal);
    for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(lub.variables(k) - fixtures::kTable3Lub[k]) <= 2e-3);
        CHECK(std::abs(glb.variables(k) - fixtures::kTable3Glb[k]) <= 2e-3);
    }
    CHECK(std::abs(lub.variables.head(5).sum() - 0.8576) <= 2e-3);
    CHECK(std::abs(glb.variables(5)) <= 1e-6);
    // regression values of this solver
    CHECK(lub.objective == Approx(0.3915242).epsilon(1e-6));
    CHECK(glb.objective == Approx(0.2571052).epsilon(1e-6));
    CHECK(glb.objective < lub.objective);
}

TEST_CASE("strong duality over the w_old sweep") {
    for (int bp = 50; bp <= 900; bp += 25) {
        for (Side side : {Side::lub, Side::glb}) {
            CAPTURE(bp);
            const auto sys = standard(side, bp);
            const auto s = solve(sys);
            REQUIRE(s.status == LpStatus::optimal);
            const auto r = check_duality(sys, s);
            CHECK(r.gap <= 1e-8);
            CHECK(r.complementary_slackness <= 1e-8);
            CHECK(r.primal_violation <= 1e-9);
            CHECK(r.dual_residual <= 1e-9);
            CHECK(r.dual_negativity == 0.0);
            CHECK(s.objective == Approx(sys.b.dot(s.dual)).epsilon(1e-12));
        }
    }
}

TEST_CASE("hedges dominate in continuous time") {
    const TenorGrid g = fixtures::grid();
    const auto q = fixtures::quotes();
    const auto bounds = multi_cds_bounds(g, fixtures::illiquid(), q);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Side side : {Side::lub, Side::glb}) {
        const auto& h = side == Side::lub ? bounds.hedge_lub : bounds.hedge_glb;
        const auto pos = hedged_position(dealer_illiquid(fixtures::illiquid(), side), q, h);
        // the midpoint approximation costs at most its bound per unit of gross notional
        const double slack = midpoint_error_bound(g) * (h.total_notional() + 1.0);
        double worst = pos.pv(g, DefaultScenario::survived());
        for (int k = 0; k < 10000; ++k) {
            const auto s = DefaultScenario::default_at(1e-9 + u(rng) * (5.0 - 1e-9), u(rng));
            worst = std::min(worst, pos.pv(g, s));
        }
        CAPTURE(side == Side::lub);
        CHECK(worst >= -slack);
        CHECK(pos.pv(g, DefaultScenario::survived()) >= -1e-9);
    }
}

TEST_CASE("homogeneity in the target") {
    const auto sys = standard(Side::lub);
    const auto base = solve(sys);
    for (double k : {0.5, 3.0, 10.0}) {
        auto scaled = sys;
        scaled.b *= k;
        const auto s = solve(scaled);
        REQUIRE(s.status == LpStatus::optimal);
        CHECK(s.objective == Approx(k * base.objective).epsilon(1e-10));
        CHECK((s.variables - k * base.variables).cwiseAbs().maxCoeff() <= 1e-9 * k);
    }
}

TEST_CASE("uniqueness probe") {
    const auto sys = standard(Side::lub);
    const auto sol = solve(sys);

    SUBCASE("standard instance is unique") {
        const auto r = uniqueness_probe(sys, sol, {100, 1e-7, 1, 1e-6});
        CHECK(r.verdict == Uniqueness::unique);
        CHECK(r.trials == 100);
        CHECK(r.matched == 100);
        CHECK(r.max_deviation <= 1e-6);
    }
    SUBCASE("zero perturbation reproduces the solution") {
        const auto r = uniqueness_probe(sys, sol, {5, 0.0, 1, 1e-12});
        CHECK(r.verdict == Uniqueness::unique);
        CHECK(r.max_deviation <= 1e-12);
    }
    SUBCASE("duplicated column is not unique") {
        ConstraintSystem dup = sys;
        dup.B.resize(sys.B.rows(), 7);
        dup.B << sys.B.leftCols(5), sys.B.col(4), sys.B.col(5);
        dup.c.resize(7);
        dup.c << sys.c.head(5), sys.c(4), 1.0;
        dup.quotes = 6;
        const auto s = solve(dup);
        REQUIRE(s.status == LpStatus::optimal);
        CHECK(s.objective == Approx(sol.objective).epsilon(1e-10));
        const auto r = uniqueness_probe(dup, s);
        CHECK(r.verdict == Uniqueness::non_unique);
        CHECK(r.matched < r.trials);
    }
    CHECK(to_string(Uniqueness::non_unique) == "non_unique");
}
