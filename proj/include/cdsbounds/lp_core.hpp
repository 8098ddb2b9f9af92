#pragma once

// Primal/dual linear programs of the corner-state system.
//
//   LUB:  min c'v  s.t. Bv >= b          dual: max b'x  s.t. B'x = c, x >= 0
//   GLB:  max c'v  s.t. Bv <= b          dual: min b'x  s.t. B'x = c, x >= 0
//
// The dual is already in standard equality form, so both are solved with a
// two-phase dense simplex on the dual (Bland's rule) and the free primal
// vector is recovered from the optimal basis.

#include "cdsbounds/lattice.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdsbounds {

enum class LpStatus { optimal, infeasible, unbounded };

std::string to_string(LpStatus s);

struct LpTolerances {
    double feasibility = 1e-9;
    double gap = 1e-8;
    double pivot = 1e-12;
};

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Eigen::VectorXd variables; ///< v (LUB) or ṽ (GLB), length K+1
    Eigen::VectorXd dual;      ///< x >= 0, length N·J+1
    double objective = 0.0;
    std::vector<Eigen::Index> basis; ///< constraint rows carried in the optimal basis
};

/// Raised by orchestration code when an LP is not solved to optimality.
class LpFailure : public std::runtime_error {
  public:
    LpFailure(LpStatus status, const std::string& what)
        : std::runtime_error(what + ": " + to_string(status)), status_(status) {}
    LpStatus status() const { return status_; }

  private:
    LpStatus status_;
};

/// Dispatches on system.side.
LpSolution solve(const ConstraintSystem& system, const LpTolerances& tol = {});
LpSolution solve_lub(const ConstraintSystem& system, const LpTolerances& tol = {});
LpSolution solve_glb(const ConstraintSystem& system, const LpTolerances& tol = {});

struct DualityReport {
    double gap = 0.0;                     ///< |c'v − b'x|
    double primal_violation = 0.0;        ///< worst violation of Bv >= b (or <=)
    double dual_residual = 0.0;           ///< ||B'x − c||_inf
    double dual_negativity = 0.0;         ///< max(0, −min x)
    double complementary_slackness = 0.0; ///< max_k |x_k · slack_k|

    bool within(const LpTolerances& tol) const;
};

DualityReport check_duality(const ConstraintSystem& system, const LpSolution& solution);

enum class Uniqueness { unique, non_unique, probe_failed };

std::string to_string(Uniqueness u);

struct ProbeOptions {
    int trials = 100;
    double scale = 1e-7;
    std::uint64_t seed = 0x5eed'cd5ULL;
    double match_tolerance = 1e-6;
};

struct ProbeReport {
    Uniqueness verdict = Uniqueness::probe_failed;
    int trials = 0;
    int matched = 0;
    int moved = 0;     ///< optimal but a different portfolio
    int unbounded = 0; ///< perturbed LP lost its optimum altogether
    int failed = 0;    ///< perturbed LP infeasible: cannot happen for a cost perturbation
    double max_deviation = 0.0;
};

/// Re-solves with each upfront u_p perturbed by independent uniform noise in
/// [−scale, scale] (the deposit cost stays 1). A solution that survives every
/// small perturbation of its cost row is unique; one that moves, or whose
/// perturbed LP has no optimum, is not.
ProbeReport uniqueness_probe(const ConstraintSystem& system, const LpSolution& solution,
                             const ProbeOptions& options = {});

} // namespace cdsbounds
