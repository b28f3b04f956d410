#include "lipfield/damage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <sstream>
#include <string>

#include "lipfield/errors.hpp"

namespace lipfield {

namespace {

/// sum_i w_i f_i(x_i)
class SeparableDamageObjective final : public SmoothObjective {
public:
    void add(double weight, DamageObjective1D f) {
        weights_.push_back(weight);
        terms_.push_back(f);
    }

    double value(const Eigen::VectorXd& x) const override {
        double v = 0.0;
        for (std::size_t i = 0; i < terms_.size(); ++i) v += weights_[i] * terms_[i].value(x[i]);
        return v;
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
        Eigen::VectorXd g(x.size());
        for (std::size_t i = 0; i < terms_.size(); ++i) g[i] = weights_[i] * terms_[i].derivative(x[i]);
        return g;
    }
    void hessian(const Eigen::VectorXd& x, std::vector<Eigen::Triplet<double>>& out) const override {
        for (std::size_t i = 0; i < terms_.size(); ++i)
            out.emplace_back(i, i, weights_[i] * terms_[i].second_derivative(x[i]));
    }
    Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& x) const override {
        Eigen::VectorXd h(x.size());
        for (std::size_t i = 0; i < terms_.size(); ++i) h[i] = weights_[i] * terms_[i].second_derivative(x[i]);
        return h;
    }

private:
    std::vector<double> weights_;
    std::vector<DamageObjective1D> terms_;
};

/// (1/2) (x - a)^T M (x - a)
class QuadraticObjective final : public SmoothObjective {
public:
    QuadraticObjective(Eigen::SparseMatrix<double> M, Eigen::VectorXd a) : M_(std::move(M)), a_(std::move(a)) {}

    double value(const Eigen::VectorXd& x) const override {
        const Eigen::VectorXd r = x - a_;
        return 0.5 * r.dot(M_ * r);
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override { return M_ * (x - a_); }
    void hessian(const Eigen::VectorXd&, std::vector<Eigen::Triplet<double>>& out) const override {
        for (int k = 0; k < M_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(M_, k); it; ++it)
                out.emplace_back(it.row(), it.col(), it.value());
    }
    Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd&) const override { return M_.diagonal(); }

private:
    Eigen::SparseMatrix<double> M_;
    Eigen::VectorXd a_;
};

void check_field(std::span<const double> d, const LipMesh& lip, const char* what) {
    if (d.size() != lip.num_vertices())
        throw std::invalid_argument(std::string(what) + " size does not match the Lip-mesh");
}

}  // namespace

std::vector<double> local_field_update(std::span<const Strain2D> strains, std::span<const double> d_n,
                                       const MaterialParams& mat, double tol) {
    if (strains.size() != d_n.size()) throw std::invalid_argument("one strain per damage value is required");
    std::vector<double> out(d_n.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = local_damage_update(strains[i], d_n[i], mat, tol);
    return out;
}

std::size_t Patch::num_active_vertices() const {
    return static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), 0));
}

Patch extract_patch(const BoundsPair& bounds, std::span<const double> d_loc, std::span<const double> d_n,
                    const LipMesh& lip, double tol_eq) {
    check_field(d_loc, lip, "d_loc");
    check_field(d_n, lip, "d_n");
    const std::size_t n = lip.num_vertices();
    Patch p;
    p.frozen.resize(n);
    p.value.assign(d_loc.begin(), d_loc.end());
    p.lower.resize(n);
    p.upper.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        p.frozen[v] = (bounds.upper[v] - bounds.lower[v] <= tol_eq || d_n[v] >= 1.0) ? 1 : 0;
        p.lower[v] = p.frozen[v] ? d_loc[v] : d_n[v];
        p.upper[v] = p.frozen[v] ? d_loc[v] : 1.0;
    }
    refresh_active_triangles(p, lip);
    return p;
}

void refresh_active_triangles(Patch& patch, const LipMesh& lip) {
    patch.active_triangles.clear();
    for (std::size_t t = 0; t < lip.num_triangles(); ++t) {
        const Tri& tri = lip.triangles()[t];
        if (!patch.frozen[tri[0]] || !patch.frozen[tri[1]] || !patch.frozen[tri[2]])
            patch.active_triangles.push_back(static_cast<int>(t));
    }
}

MinimizeResult constrained_damage_minimize(std::span<const Strain2D> strains, std::span<const double> areas,
                                           const Patch& patch, const LipMesh& lip, const MaterialParams& mat,
                                           const ConeSolverOptions& options,
                                           const std::vector<Point2>* warm_multipliers) {
    const std::size_t n = lip.num_vertices();
    if (strains.size() != n || areas.size() != n) throw std::invalid_argument("one strain and area per Lip vertex");

    MinimizeResult res;
    res.d = patch.value;
    std::vector<int> var(n, -1);
    int nvar = 0;
    for (std::size_t v = 0; v < n; ++v)
        if (!patch.frozen[v]) var[v] = nvar++;
    if (nvar == 0) {
        res.multipliers.assign(patch.active_triangles.size(), Point2{});
        return res;
    }

    SeparableDamageObjective objective;
    ConeProgram prog;
    prog.objective = &objective;
    prog.radius = 1.0 / mat.l;
    prog.lower.resize(nvar);
    prog.upper.resize(nvar);
    Eigen::VectorXd x0(nvar);
    for (std::size_t v = 0; v < n; ++v) {
        const int i = var[v];
        if (i < 0) continue;
        objective.add(areas[v], DamageObjective1D(strains[v], mat));
        prog.lower[i] = patch.lower[v];
        prog.upper[i] = patch.upper[v];
        x0[i] = patch.value[v];
    }
    prog.cones.reserve(patch.active_triangles.size());
    for (int t : patch.active_triangles) {
        const Tri& tri = lip.triangles()[t];
        const GradientRows& rows = lip.gradient_rows(t);
        ConeConstraint c;
        for (int k = 0; k < 3; ++k) {
            const int v = tri[k];
            if (var[v] >= 0) {
                c.idx[c.count] = var[v];
                c.gx[c.count] = rows.dx[k];
                c.gy[c.count] = rows.dy[k];
                ++c.count;
            } else {
                c.offset.x += rows.dx[k] * patch.value[v];
                c.offset.y += rows.dy[k] * patch.value[v];
            }
        }
        prog.cones.push_back(c);
    }

    const ConeSolution sol = solve_cone_program(prog, x0, options, warm_multipliers);
    for (std::size_t v = 0; v < n; ++v)
        if (var[v] >= 0) res.d[v] = sol.x[var[v]];
    res.multipliers = sol.multipliers;
    res.outer_iterations = sol.outer_iterations;
    res.inner_iterations = sol.inner_iterations;
    res.converged = sol.converged;
    res.stalled = sol.stalled;
    res.violation = sol.violation;
    res.stationarity = sol.stationarity;
    return res;
}

std::vector<double> damage_step(std::span<const Strain2D> strains, std::span<const double> areas,
                                std::span<const double> d_n, const LipMesh& lip, const EdgeGraph& graph,
                                const MaterialParams& mat, const DamageTolerances& tol, DamageStepInfo* info) {
    check_field(d_n, lip, "d_n");
    const std::size_t n = lip.num_vertices();
    const double slope = 1.0 / mat.l;
    const std::vector<double> d_loc = local_field_update(strains, d_n, mat, tol.local);

    Patch patch;
    if (tol.patching) {
        patch = extract_patch(dijkstra_bounds(d_loc, graph, mat.l), d_loc, d_n, lip, tol.eq);
    } else {
        // Only vertices with a collapsed box stay fixed.
        BoundsPair open{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
        patch = extract_patch(open, d_loc, d_n, lip, -1.0);
    }

    ConeSolverOptions cone = tol.cone;
    cone.throw_on_failure = false;

    DamageStepInfo local_info;
    std::vector<double> d = d_loc;
    std::vector<Point2> tri_multiplier(lip.num_triangles());
    std::vector<char> was_active(lip.num_triangles(), 0);
    for (;;) {
        ++local_info.passes;
        std::vector<Point2> warm(patch.active_triangles.size());
        for (std::size_t k = 0; k < warm.size(); ++k) warm[k] = tri_multiplier[patch.active_triangles[k]];
        const MinimizeResult res = constrained_damage_minimize(strains, areas, patch, lip, mat, cone, &warm);
        local_info.outer_iterations += res.outer_iterations;
        local_info.inner_iterations += res.inner_iterations;
        if (!res.converged) {
            // Frozen values can leave the released vertices without any
            // admissible value; grow the patch by one ring and retry.
            int grown = 0;
            if (res.stalled) {
                for (int t : patch.active_triangles)
                    for (int v : lip.triangles()[t])
                        if (patch.frozen[v] && d_n[v] < 1.0) {
                            patch.frozen[v] = 0;
                            patch.lower[v] = d_n[v];
                            patch.upper[v] = 1.0;
                            ++grown;
                        }
            }
            if (grown == 0 && cone.detect_infeasible) {
                // Every vertex that can move is free, so d = 1 is admissible
                // and the flat residual was slow progress. Resume without the
                // emptiness test.
                cone.detect_infeasible = false;
                for (std::size_t v = 0; v < n; ++v)
                    if (!patch.frozen[v]) patch.value[v] = res.d[v];
                for (std::size_t k = 0; k < res.multipliers.size(); ++k)
                    tri_multiplier[patch.active_triangles[k]] = res.multipliers[k];
                continue;
            }
            if (grown == 0) {
                std::ostringstream msg;
                msg << "damage minimization failed on a patch of " << patch.num_active_vertices()
                    << " vertices after " << res.outer_iterations << " outer iterations (cone violation "
                    << res.violation << ", stationarity " << res.stationarity << ")";
                throw SolverError(msg.str());
            }
            local_info.released_infeasible += grown;
            refresh_active_triangles(patch, lip);
            continue;
        }
        d = res.d;
        std::fill(tri_multiplier.begin(), tri_multiplier.end(), Point2{});
        std::fill(was_active.begin(), was_active.end(), 0);
        for (std::size_t k = 0; k < res.multipliers.size(); ++k) {
            tri_multiplier[patch.active_triangles[k]] = res.multipliers[k];
            was_active[patch.active_triangles[k]] = 1;
        }
        if (!tol.patching) break;

        std::vector<char> release(n, 0);
        // Step 4: frozen triangles violating the slope bound.
        for (std::size_t t = 0; t < lip.num_triangles(); ++t) {
            if (was_active[t]) continue;
            if (norm(lip.gradient(d, t)) - slope > tol.lip) {
                for (int v : lip.triangles()[t])
                    if (d_n[v] < 1.0) release[v] = 1;
            }
        }
        // Frozen vertices whose value is not stationary once the multipliers of
        // the neighbouring active triangles are accounted for.
        std::vector<double> residual(n, 0.0);
        std::vector<char> touched(n, 0);
        for (std::size_t t = 0; t < lip.num_triangles(); ++t) {
            if (!was_active[t]) continue;
            const Point2 y = tri_multiplier[t];
            if (y.x == 0.0 && y.y == 0.0) continue;
            const GradientRows& rows = lip.gradient_rows(t);
            for (int k = 0; k < 3; ++k) {
                const int v = lip.triangles()[t][k];
                if (!patch.frozen[v]) continue;
                residual[v] += rows.dx[k] * y.x + rows.dy[k] * y.y;
                touched[v] = 1;
            }
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (!touched[v] || d_n[v] >= 1.0 || release[v]) continue;
            const DamageObjective1D f(strains[v], mat);
            const double r = areas[v] * f.derivative(d[v]) + residual[v];
            const double s = areas[v] * f.second_derivative(d[v]);
            if (d[v] <= d_n[v] && r >= 0.0) continue;
            if (d[v] >= 1.0 && r <= 0.0) continue;
            if (std::abs(r) / s > tol.release) {
                release[v] = 1;
                ++local_info.released_kkt;
            }
        }
        int released = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (!release[v] || !patch.frozen[v]) continue;
            patch.frozen[v] = 0;
            patch.lower[v] = d_n[v];
            patch.upper[v] = 1.0;
            ++released;
        }
        local_info.released_lipschitz += released;
        if (released == 0) break;
        for (std::size_t v = 0; v < n; ++v) patch.value[v] = d[v];
        refresh_active_triangles(patch, lip);
    }
    local_info.released_lipschitz -= local_info.released_kkt;
    local_info.active_vertices = patch.num_active_vertices();
    local_info.max_violation = std::max(0.0, lipschitz_violation(d, lip, mat.l, LipschitzSet::Lh));
    if (info != nullptr) *info = local_info;
    return d;
}

Eigen::SparseMatrix<double> consistent_mass(const LipMesh& lip) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * lip.num_triangles());
    for (std::size_t t = 0; t < lip.num_triangles(); ++t) {
        const double a = lip.triangle_area(t) / 12.0;
        const Tri& tri = lip.triangles()[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trips.emplace_back(tri[i], tri[j], i == j ? 2.0 * a : a);
    }
    const auto n = static_cast<Eigen::Index>(lip.num_vertices());
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

std::vector<double> lip_project_L2(std::span<const double> d_in, const LipMesh& lip, double l,
                                   const ConeSolverOptions& options) {
    check_field(d_in, lip, "input field");
    if (!(l > 0.0)) throw std::invalid_argument("regularization length must be positive");
    const auto n = static_cast<Eigen::Index>(lip.num_vertices());
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(d_in.data(), n);
    QuadraticObjective objective(consistent_mass(lip), a);
    ConeProgram prog;
    prog.objective = &objective;
    prog.radius = 1.0 / l;
    prog.lower = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    prog.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t < lip.num_triangles(); ++t) {
        const GradientRows& rows = lip.gradient_rows(t);
        ConeConstraint c;
        c.count = 3;
        for (int k = 0; k < 3; ++k) {
            c.idx[k] = lip.triangles()[t][k];
            c.gx[k] = rows.dx[k];
            c.gy[k] = rows.dy[k];
        }
        prog.cones.push_back(c);
    }
    const ConeSolution sol = solve_cone_program(prog, a, options);
    return {sol.x.data(), sol.x.data() + n};
}

}  // namespace lipfield
