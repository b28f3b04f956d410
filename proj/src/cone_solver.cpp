#include "lipfield/cone_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "lipfield/errors.hpp"

namespace lipfield {

namespace {

Point2 project_ball(Point2 w, double r) {
    const double n = norm(w);
    return n <= r ? w : (r / n) * w;
}

class AugmentedLagrangian {
public:
    AugmentedLagrangian(const ConeProgram& p, const ConeSolverOptions& opt) : p_(p), opt_(opt) {}

    std::vector<Point2> y;
    double rho = 1.0;
    int inner_iterations = 0;

    Point2 cone_value(const ConeConstraint& c, const Eigen::VectorXd& x) const {
        Point2 z = c.offset;
        for (int k = 0; k < c.count; ++k) {
            z.x += c.gx[k] * x[c.idx[k]];
            z.y += c.gy[k] * x[c.idx[k]];
        }
        return z;
    }

    Point2 shifted(std::size_t t, const Eigen::VectorXd& x) const {
        return cone_value(p_.cones[t], x) + (1.0 / rho) * y[t];
    }

    double value(const Eigen::VectorXd& x) const {
        double v = p_.objective->value(x);
        for (std::size_t t = 0; t < p_.cones.size(); ++t) {
            const Point2 w = shifted(t, x);
            const Point2 e = w - project_ball(w, p_.radius);
            v += 0.5 * rho * dot(e, e);
        }
        return v;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g = p_.objective->gradient(x);
        for (std::size_t t = 0; t < p_.cones.size(); ++t) {
            const ConeConstraint& c = p_.cones[t];
            const Point2 w = shifted(t, x);
            const Point2 e = rho * (w - project_ball(w, p_.radius));
            for (int k = 0; k < c.count; ++k) g[c.idx[k]] += c.gx[k] * e.x + c.gy[k] * e.y;
        }
        return g;
    }

    // I - D proj at w: zero inside the ball; outside, 1 along w and 1 - r/|w| across.
    std::array<double, 3> residual_jacobian(Point2 w) const {
        const double n = norm(w);
        if (n <= p_.radius) return {0.0, 0.0, 0.0};
        const double s = 1.0 - p_.radius / n;
        const Point2 u = (1.0 / n) * w;
        return {s + (1.0 - s) * u.x * u.x, (1.0 - s) * u.x * u.y, s + (1.0 - s) * u.y * u.y};
    }

    // With `majorize`, every cone contributes rho G^T G, an upper bound of the
    // generalized Hessian that stays valid when inactive cones switch on.
    void hessian(const Eigen::VectorXd& x, std::vector<Eigen::Triplet<double>>& trips, bool majorize = false) const {
        p_.objective->hessian(x, trips);
        for (std::size_t t = 0; t < p_.cones.size(); ++t) {
            const ConeConstraint& c = p_.cones[t];
            const auto [pxx, pxy, pyy] =
                majorize ? std::array<double, 3>{1.0, 0.0, 1.0} : residual_jacobian(shifted(t, x));
            for (int a = 0; a < c.count; ++a) {
                for (int b = 0; b < c.count; ++b) {
                    const double v = c.gx[a] * (pxx * c.gx[b] + pxy * c.gy[b]) + c.gy[a] * (pxy * c.gx[b] + pyy * c.gy[b]);
                    trips.emplace_back(c.idx[a], c.idx[b], rho * v);
                }
            }
        }
    }

    Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& x) const {
        Eigen::VectorXd diag = p_.objective->hessian_diagonal(x);
        for (std::size_t t = 0; t < p_.cones.size(); ++t) {
            const ConeConstraint& c = p_.cones[t];
            const auto [pxx, pxy, pyy] = residual_jacobian(shifted(t, x));
            for (int a = 0; a < c.count; ++a)
                diag[c.idx[a]] += rho * (pxx * c.gx[a] * c.gx[a] + 2.0 * pxy * c.gx[a] * c.gy[a] + pyy * c.gy[a] * c.gy[a]);
        }
        return diag;
    }

    double scaled_projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                     const Eigen::VectorXd& s) const {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double moved = std::clamp(x[i] - g[i] / s[i], p_.lower[i], p_.upper[i]);
            worst = std::max(worst, std::abs(x[i] - moved));
        }
        return worst;
    }

    /// Projected Newton on the box; returns the final scaled stationarity.
    double minimize(Eigen::VectorXd& x) {
        const Eigen::Index n = x.size();
        double stat = std::numeric_limits<double>::infinity();
        for (int it = 0; it < opt_.max_inner; ++it) {
            const Eigen::VectorXd g = gradient(x);
            const Eigen::VectorXd s = hessian_diagonal(x);
            stat = scaled_projected_gradient(x, g, s);
            // One Newton step is always taken: the multipliers have just moved.
            if (it > 0 && stat <= opt_.stat_tol) return stat;
            ++inner_iterations;

            const double eps = std::min(stat, 1e-3);
            std::vector<char> bound(n, 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                const bool at_lo = x[i] - p_.lower[i] <= eps && g[i] > 0.0;
                const bool at_hi = p_.upper[i] - x[i] <= eps && g[i] < 0.0;
                bound[i] = (at_lo || at_hi || p_.upper[i] <= p_.lower[i]) ? 1 : 0;
            }
            if (line_search(x, g, newton_direction(x, g, s, bound, false))) continue;
            if (line_search(x, g, newton_direction(x, g, s, bound, true))) continue;
            if (!line_search(x, g, -g.cwiseQuotient(s))) return stat;
        }
        const Eigen::VectorXd g = gradient(x);
        return scaled_projected_gradient(x, g, hessian_diagonal(x));
    }

private:
    const ConeProgram& p_;
    const ConeSolverOptions& opt_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analyzed_ = false;
    std::vector<Eigen::Triplet<double>> trips_;

    Eigen::VectorXd newton_direction(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& s,
                                     const std::vector<char>& bound, bool majorize) {
        const Eigen::Index n = x.size();
        trips_.clear();
        hessian(x, trips_, majorize);
        for (auto& tr : trips_) {
            if (bound[tr.row()] || bound[tr.col()]) tr = Eigen::Triplet<double>(tr.row(), tr.col(), 0.0);
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (bound[i]) trips_.emplace_back(i, i, s[i]);
        Eigen::SparseMatrix<double> H(n, n);
        H.setFromTriplets(trips_.begin(), trips_.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(H);
            analyzed_ = true;
        }
        ldlt_.factorize(H);
        if (ldlt_.info() != Eigen::Success) return -g.cwiseQuotient(s);
        return ldlt_.solve(-g);
    }

    Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(p_.lower).cwiseMin(p_.upper); }

    bool line_search(Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& p) const {
        const double L0 = value(x);
        double alpha = 1.0;
        for (int k = 0; k < 60; ++k, alpha *= 0.5) {
            const Eigen::VectorXd xn = project(x + alpha * p);
            const Eigen::VectorXd dx = xn - x;
            if (dx.lpNorm<Eigen::Infinity>() == 0.0) return false;
            const double predicted = g.dot(dx);
            if (predicted >= 0.0) continue;
            // Near the solution merit differences drown in rounding. The merit
            // is convex along the segment, so a nonpositive end slope still
            // certifies descent.
            if (value(xn) <= L0 + 1e-4 * predicted || gradient(xn).dot(dx) <= 0.0) {
                x = xn;
                return true;
            }
        }
        return false;
    }
};

}  // namespace

ConeSolution solve_cone_program(const ConeProgram& program, Eigen::VectorXd x, const ConeSolverOptions& options,
                                const std::vector<Point2>* warm_multipliers) {
    const Eigen::Index n = x.size();
    if (program.objective == nullptr || program.lower.size() != n || program.upper.size() != n)
        throw std::invalid_argument("cone program dimensions are inconsistent");
    for (const ConeConstraint& c : program.cones)
        for (int k = 0; k < c.count; ++k)
            if (c.idx[k] < 0 || c.idx[k] >= n) throw std::invalid_argument("cone constraint index out of range");
    x = x.cwiseMax(program.lower).cwiseMin(program.upper);

    ConeSolution sol;
    AugmentedLagrangian al(program, options);
    const std::size_t m = program.cones.size();
    al.y.assign(m, Point2{});
    if (warm_multipliers != nullptr && warm_multipliers->size() == m) al.y = *warm_multipliers;

    double rho_max = std::numeric_limits<double>::infinity();
    // Below this penalty the objective curvature can still outweigh the
    // cones, so a flat residual says nothing about feasibility.
    double rho_dominant = 0.0;
    if (n > 0 && m > 0) {
        const Eigen::VectorXd diag = program.objective->hessian_diagonal(x);
        const double mean_diag = diag.mean();
        double mean_g2 = 0.0;
        for (const ConeConstraint& c : program.cones)
            for (int k = 0; k < c.count; ++k) mean_g2 += c.gx[k] * c.gx[k] + c.gy[k] * c.gy[k];
        mean_g2 /= static_cast<double>(m);
        al.rho = mean_g2 > 0.0 ? 10.0 * mean_diag / mean_g2 : 1.0;
        rho_max = options.max_penalty_ratio * al.rho;
        if (mean_g2 > 0.0) rho_dominant = std::min(100.0 * diag.maxCoeff() / mean_g2, rho_max);
    }

    const double r = program.radius;
    double previous = std::numeric_limits<double>::infinity();
    double residual = 0.0;
    int stalled_increases = 0;
    int flat_at_cap = 0;
    for (int outer = 0; outer < options.max_outer; ++outer) {
        sol.outer_iterations = outer + 1;
        sol.stationarity = al.minimize(x);
        residual = 0.0;
        double violation = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            const Point2 z = al.cone_value(program.cones[t], x);
            const Point2 w = z + (1.0 / al.rho) * al.y[t];
            const Point2 s = project_ball(w, r);
            residual = std::max(residual, norm(z - s) / r);
            violation = std::max(violation, norm(z) - r);
            al.y[t] = al.rho * (w - s);
        }
        sol.violation = violation;
        if (residual <= options.feas_tol && sol.stationarity <= options.stat_tol) {
            sol.converged = true;
            break;
        }
        // With the penalty capped the subproblems are solved only as far as
        // the conditioning allows.
        flat_at_cap = al.rho >= rho_max && residual > 0.9 * previous ? flat_at_cap + 1 : 0;
        if (flat_at_cap >= 5) {
            if (residual <= options.feas_tol && sol.stationarity <= options.floor_tol) {
                sol.converged = true;
                sol.at_floor = true;
                break;
            }
            if (options.detect_infeasible) {
                // Frozen data satisfying the constraints only to the tolerance
                // of an earlier solve leaves a residual no penalty removes.
                sol.stalled = true;
                break;
            }
        }
        if (residual > options.feas_tol && residual > 0.25 * previous) {
            // Slow dual convergence also stalls the residual; only a persistent
            // primal violation under a growing penalty indicates an empty
            // feasible set.
            const bool primal_stuck =
                al.rho >= rho_dominant && al.rho < rho_max && residual > 0.9 * previous &&
                violation > options.feas_tol * r;
            al.rho = std::min(10.0 * al.rho, rho_max);
            stalled_increases = primal_stuck ? stalled_increases + 1 : 0;
            if (options.detect_infeasible && stalled_increases >= 4) {
                sol.stalled = true;
                break;
            }
        } else {
            stalled_increases = 0;
        }
        previous = residual;
    }
    sol.x = x;
    sol.multipliers = al.y;
    sol.inner_iterations = al.inner_iterations;
    if (!sol.converged && options.throw_on_failure) {
        std::ostringstream msg;
        msg << "cone solver did not converge" << (sol.stalled ? " (feasible set looks empty)" : "")
            << ": cone residual " << residual << ", stationarity " << sol.stationarity;
        throw SolverError(msg.str());
    }
    return sol;
}

}  // namespace lipfield
