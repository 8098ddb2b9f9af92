#include "cdsbounds/lp_core.hpp"

#include "cdsbounds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cdsbounds {

std::string to_string(LpStatus s) {
    switch (s) {
    case LpStatus::optimal:
        return "optimal";
    case LpStatus::infeasible:
        return "infeasible";
    case LpStatus::unbounded:
        return "unbounded";
    }
    return "unknown";
}

std::string to_string(Uniqueness u) {
    switch (u) {
    case Uniqueness::unique:
        return "unique";
    case Uniqueness::non_unique:
        return "non_unique";
    case Uniqueness::probe_failed:
        return "probe_failed";
    }
    return "unknown";
}

namespace {

enum class SimplexOutcome { optimal, infeasible, unbounded };

struct SimplexResult {
    SimplexOutcome outcome = SimplexOutcome::infeasible;
    Eigen::VectorXd x; ///< structural variables
    Eigen::VectorXd y; ///< multipliers of the equality rows
    std::vector<Eigen::Index> basis;
};

// max f'x  s.t.  A x = rhs, x >= 0, by a two-phase tableau simplex with
// Bland's rule. Final x and y are recomputed from the optimal basis with an
// LU factorization so tableau round-off does not leak into the answer.
class DenseSimplex {
  public:
    DenseSimplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs, const Eigen::VectorXd& f,
                 const LpTolerances& tol)
        : m_(a.rows()), n_(a.cols()), tol_(tol), row_sign_(m_), f_(f) {
        a_ = a;
        rhs_ = rhs;
        for (Eigen::Index i = 0; i < m_; ++i) {
            row_sign_(i) = rhs(i) < 0.0 ? -1.0 : 1.0;
            a_.row(i) *= row_sign_(i);
            rhs_(i) *= row_sign_(i);
        }
    }

    SimplexResult run() {
        SimplexResult out;
        init_phase_one();
        if (!iterate(/*allow_artificial=*/true)) {
            // phase one is bounded below by zero; this means a pivot breakdown
            out.outcome = SimplexOutcome::infeasible;
            return out;
        }
        double infeasibility = 0.0;
        for (Eigen::Index i = 0; i < m_; ++i)
            if (basis_[static_cast<std::size_t>(i)] >= n_)
                infeasibility += t_(i, rhs_col());
        if (infeasibility > tol_.feasibility * (1.0 + rhs_.lpNorm<Eigen::Infinity>())) {
            out.outcome = SimplexOutcome::infeasible;
            return out;
        }
        drive_out_artificials();

        init_phase_two();
        if (!iterate(/*allow_artificial=*/false)) {
            out.outcome = SimplexOutcome::unbounded;
            return out;
        }
        refine(out);
        out.outcome = SimplexOutcome::optimal;
        return out;
    }

  private:
    Eigen::Index rhs_col() const { return n_ + m_; }
    Eigen::Index obj_row() const { return m_; }

    void init_phase_one() {
        t_ = Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1);
        t_.topLeftCorner(m_, n_) = a_;
        t_.block(0, n_, m_, m_).setIdentity();
        t_.col(rhs_col()).head(m_) = rhs_;
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index i = 0; i < m_; ++i)
            basis_[static_cast<std::size_t>(i)] = n_ + i;
        // maximize −Σ artificials: reduced costs after pricing out the basis
        t_.row(obj_row()).setZero();
        for (Eigen::Index i = 0; i < m_; ++i) {
            t_.row(obj_row()).head(n_) += t_.row(i).head(n_);
            t_(obj_row(), rhs_col()) += t_(i, rhs_col());
        }
    }

    void init_phase_two() {
        t_.row(obj_row()).setZero();
        t_.row(obj_row()).head(n_) = f_.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            const double fb = j < n_ ? f_(j) : 0.0;
            if (fb != 0.0)
                t_.row(obj_row()) -= fb * t_.row(i);
        }
    }

    // Returns false if an improving column has no blocking row.
    bool iterate(bool allow_artificial) {
        const Eigen::Index last = allow_artificial ? n_ + m_ : n_;
        const long max_iter = 100L * (m_ + n_ + 1);
        for (long it = 0; it < max_iter; ++it) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < last; ++j) {
                if (t_(obj_row(), j) > 1e-12 && !is_basic(j)) {
                    enter = j; // Bland: lowest index
                    break;
                }
            }
            if (enter < 0)
                return true;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double piv = t_(i, enter);
                if (piv <= tol_.pivot)
                    continue;
                const double ratio = t_(i, rhs_col()) / piv;
                if (ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
                     basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave < 0)
                return false;
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex iteration limit reached");
    }

    bool is_basic(Eigen::Index j) const {
        return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
    }

    void pivot(Eigen::Index r, Eigen::Index e) {
        t_.row(r) /= t_(r, e);
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == r)
                continue;
            const double factor = t_(i, e);
            if (factor != 0.0)
                t_.row(i) -= factor * t_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = e;
    }

    void drive_out_artificials() {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < n_)
                continue;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (!is_basic(j) && std::abs(t_(i, j)) > 1e-9) {
                    pivot(i, j);
                    break;
                }
            }
            // otherwise the row is redundant; its artificial stays basic at zero
        }
    }

    void refine(SimplexResult& out) const {
        Eigen::MatrixXd ab(m_, m_);
        Eigen::VectorXd fb(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            if (j < n_) {
                ab.col(i) = a_.col(j);
                fb(i) = f_(j);
            } else {
                ab.col(i) = Eigen::VectorXd::Unit(m_, j - n_);
                fb(i) = 0.0;
            }
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(ab);
        const Eigen::VectorXd xb = lu.solve(rhs_);
        const Eigen::VectorXd y = lu.transpose().solve(fb);

        out.x = Eigen::VectorXd::Zero(n_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            if (j < n_) {
                out.x(j) = xb(i);
                out.basis.push_back(j);
            }
        }
        std::sort(out.basis.begin(), out.basis.end());
        out.y = y.cwiseProduct(row_sign_);
    }

    Eigen::Index m_, n_;
    LpTolerances tol_;
    Eigen::MatrixXd a_;
    Eigen::VectorXd rhs_;
    Eigen::VectorXd row_sign_;
    Eigen::VectorXd f_;
    Eigen::MatrixXd t_;
    std::vector<Eigen::Index> basis_;
};

// Farkas: {v : B v >= b} is empty iff some x >= 0 has B'x = 0 and b'x > 0.
bool primal_feasible(const Eigen::MatrixXd& bmat, const Eigen::VectorXd& bvec,
                     const LpTolerances& tol) {
    const Eigen::Index rows = bmat.rows();
    const Eigen::Index cols = bmat.cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cols + 1, rows);
    a.topRows(cols) = bmat.transpose();
    a.row(cols).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(cols + 1);
    rhs(cols) = 1.0;
    DenseSimplex probe(a, rhs, bvec, tol);
    const auto r = probe.run();
    if (r.outcome != SimplexOutcome::optimal)
        return true;
    return bvec.dot(r.x) <= tol.feasibility;
}

// Solves min c'v s.t. G v >= g through its standard-form dual.
LpSolution solve_ge(const Eigen::MatrixXd& g, const Eigen::VectorXd& gvec, const Eigen::VectorXd& c,
                    const LpTolerances& tol) {
    DenseSimplex simplex(g.transpose(), c, gvec, tol);
    const auto r = simplex.run();
    LpSolution sol;
    switch (r.outcome) {
    case SimplexOutcome::infeasible:
        sol.status = primal_feasible(g, gvec, tol) ? LpStatus::unbounded : LpStatus::infeasible;
        return sol;
    case SimplexOutcome::unbounded:
        sol.status = LpStatus::infeasible;
        return sol;
    case SimplexOutcome::optimal:
        break;
    }
    sol.status = LpStatus::optimal;
    sol.variables = r.y;
    sol.dual = r.x;
    sol.basis = r.basis;
    sol.objective = c.dot(r.y);
    return sol;
}

} // namespace

LpSolution solve_lub(const ConstraintSystem& system, const LpTolerances& tol) {
    CDSB_REQUIRE(system.side == Side::lub, "solve_lub needs a Side::lub system");
    return solve_ge(system.B, system.b, system.c, tol);
}

LpSolution solve_glb(const ConstraintSystem& system, const LpTolerances& tol) {
    CDSB_REQUIRE(system.side == Side::glb, "solve_glb needs a Side::glb system");
    // max c'ṽ s.t. Bṽ <= b  ==  −min c'v s.t. Bv >= −b with v = −ṽ
    LpSolution sol = solve_ge(system.B, -system.b, system.c, tol);
    if (sol.status == LpStatus::optimal) {
        sol.variables = -sol.variables;
        sol.objective = system.c.dot(sol.variables);
    }
    return sol;
}

LpSolution solve(const ConstraintSystem& system, const LpTolerances& tol) {
    return system.side == Side::lub ? solve_lub(system, tol) : solve_glb(system, tol);
}

bool DualityReport::within(const LpTolerances& tol) const {
    return gap <= tol.gap && primal_violation <= tol.feasibility &&
           dual_residual <= tol.feasibility && dual_negativity <= tol.feasibility &&
           complementary_slackness <= tol.gap;
}

DualityReport check_duality(const ConstraintSystem& system, const LpSolution& solution) {
    CDSB_REQUIRE(solution.status == LpStatus::optimal, "duality check needs an optimal solution");
    DualityReport r;
    const Eigen::VectorXd& v = solution.variables;
    const Eigen::VectorXd& x = solution.dual;
    const Eigen::VectorXd slack =
        system.side == Side::lub ? Eigen::VectorXd(system.B * v - system.b)
                                 : Eigen::VectorXd(system.b - system.B * v);
    r.gap = std::abs(system.c.dot(v) - system.b.dot(x));
    r.primal_violation = std::max(0.0, -slack.minCoeff());
    r.dual_residual = (system.B.transpose() * x - system.c).lpNorm<Eigen::Infinity>();
    r.dual_negativity = std::max(0.0, -x.minCoeff());
    r.complementary_slackness = x.cwiseProduct(slack).cwiseAbs().maxCoeff();
    return r;
}

ProbeReport uniqueness_probe(const ConstraintSystem& system, const LpSolution& solution,
                             const ProbeOptions& options) {
    CDSB_REQUIRE(solution.status == LpStatus::optimal, "uniqueness probe needs an optimal solution");
    CDSB_REQUIRE(options.trials >= 0 && options.scale >= 0.0, "probe trials and scale must be >= 0");
    ProbeReport report;
    report.trials = options.trials;
    for (int t = 0; t < options.trials; ++t) {
        // one generator per trial so trials are independent of execution order
        std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(t));
        ConstraintSystem perturbed = system;
        for (Eigen::Index p = 0; p < system.quotes; ++p) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            perturbed.c(p) += options.scale * (2.0 * u - 1.0);
        }
        const LpSolution s = solve(perturbed);
        if (s.status == LpStatus::unbounded) {
            ++report.unbounded;
            continue;
        }
        if (s.status != LpStatus::optimal) {
            ++report.failed;
            continue;
        }
        const double dev = (s.variables - solution.variables).lpNorm<Eigen::Infinity>();
        report.max_deviation = std::max(report.max_deviation, dev);
        if (dev <= options.match_tolerance)
            ++report.matched;
        else
            ++report.moved;
    }
    if (report.failed > 0)
        report.verdict = Uniqueness::probe_failed;
    else if (report.moved > 0 || report.unbounded > 0)
        report.verdict = Uniqueness::non_unique;
    else
        report.verdict = Uniqueness::unique;
    return report;
}

} // namespace cdsbounds
