#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lipfield/geometry.hpp"

namespace lipfield {

/// Twice differentiable convex objective with a positive Hessian diagonal.
class SmoothObjective {
public:
    virtual ~SmoothObjective() = default;
    virtual double value(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
    /// Appends Hessian entries; the pattern must not depend on x.
    virtual void hessian(const Eigen::VectorXd& x, std::vector<Eigen::Triplet<double>>& out) const = 0;
    virtual Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& x) const = 0;
};

/// || sum_k (gx_k, gy_k) x[idx_k] + offset || <= radius.
struct ConeConstraint {
    std::array<int, 3> idx{-1, -1, -1};
    std::array<double, 3> gx{};
    std::array<double, 3> gy{};
    int count = 0;
    Point2 offset;
};

struct ConeProgram {
    const SmoothObjective* objective = nullptr;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<ConeConstraint> cones;
    double radius = 1.0;
};

struct ConeSolverOptions {
    /// Cone residual |z - proj(z)| relative to the radius.
    double feas_tol = 1e-10;
    /// Box-projected gradient step, scaled by the augmented Lagrangian Hessian
    /// diagonal (units of x).
    double stat_tol = 1e-11;
    int max_outer = 80;
    /// Cap on the penalty relative to its initial value. Far beyond this
    /// the Newton systems lose all accuracy in double precision.
    double max_penalty_ratio = 1e10;
    /// Looser stationarity accepted once the penalty is capped and the
    /// residual has stopped improving.
    double floor_tol = 1e-7;
    int max_inner = 200;
    /// Stop early when the residual looks like an empty feasible set. Turn off
    /// when the set is known to be nonempty.
    bool detect_infeasible = true;
    /// When false a failed solve returns its last iterate with converged = false.
    bool throw_on_failure = true;
};

struct ConeSolution {
    Eigen::VectorXd x;
    std::vector<Point2> multipliers;  // one per cone, acting as G^T y
    int outer_iterations = 0;
    int inner_iterations = 0;
    double violation = 0.0;     // max (|z| - radius)+
    double stationarity = 0.0;  // scaled KKT residual
    bool converged = false;
    /// Accepted under ConeSolverOptions::floor_tol.
    bool at_floor = false;
    /// The cone residual stopped shrinking under growing penalties, the usual
    /// signature of an empty feasible set.
    bool stalled = false;
};

/// Minimizes the objective over the box intersected with the cones by an
/// augmented Lagrangian on the cone constraints; each subproblem is a box
/// constrained semismooth problem solved by projected Newton. Throws
/// SolverError when the budget is exhausted or the residual stalls, unless
/// options.throw_on_failure is false.
ConeSolution solve_cone_program(const ConeProgram& program, Eigen::VectorXd x0,
                                const ConeSolverOptions& options = {},
                                const std::vector<Point2>* warm_multipliers = nullptr);

}  // namespace lipfield
