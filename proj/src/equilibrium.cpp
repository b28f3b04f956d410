#include "lipfield/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lipfield {

namespace {

using BMatrix = Eigen::Matrix<double, 3, 6>;

BMatrix strain_matrix(const ElementShape& s) {
    BMatrix B = BMatrix::Zero();
    for (int i = 0; i < 3; ++i) {
        B(0, 2 * i) = s.bx[i];
        B(1, 2 * i + 1) = s.by[i];
        B(2, 2 * i) = s.by[i];
        B(2, 2 * i + 1) = s.bx[i];
    }
    return B;
}

Eigen::Matrix3d to_eigen(const Tangent& D) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = D[i][j];
    return m;
}

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<int> parent_;
};

const char* comp_name(int c) { return c == 0 ? "x" : "y"; }

}  // namespace

std::vector<ElementShape> element_shapes(const FeMesh& mesh) {
    std::vector<ElementShape> out;
    out.reserve(mesh.num_elements());
    const auto& nodes = mesh.nodes();
    for (const Tri& t : mesh.triangles()) {
        const Point2 p[3] = {nodes[t[0]], nodes[t[1]], nodes[t[2]]};
        const double two_a = cross(p[1] - p[0], p[2] - p[0]);
        ElementShape s;
        s.area = 0.5 * two_a;
        for (int i = 0; i < 3; ++i) {
            const Point2 a = p[(i + 1) % 3], b = p[(i + 2) % 3];
            s.bx[i] = (a.y - b.y) / two_a;
            s.by[i] = (b.x - a.x) / two_a;
        }
        out.push_back(s);
    }
    return out;
}

Strain2D element_strain(const ElementShape& s, const Tri& tri, const Eigen::VectorXd& u) {
    Strain2D e;
    for (int i = 0; i < 3; ++i) {
        const double ux = u[2 * tri[i]], uy = u[2 * tri[i] + 1];
        e.xx += s.bx[i] * ux;
        e.yy += s.by[i] * uy;
        e.xy += 0.5 * (s.by[i] * ux + s.bx[i] * uy);
    }
    return e;
}

std::vector<Strain2D> element_strains(const FeMesh& mesh, const Eigen::VectorXd& u) {
    const auto shapes = element_shapes(mesh);
    std::vector<Strain2D> out(mesh.num_elements());
    for (std::size_t e = 0; e < out.size(); ++e) out[e] = element_strain(shapes[e], mesh.triangles()[e], u);
    return out;
}

Matrix6 element_stiffness(const ElementShape& s, const Tangent& D) {
    const BMatrix B = strain_matrix(s);
    Matrix6 K = s.area * B.transpose() * to_eigen(D) * B;
    return 0.5 * (K + K.transpose());
}

Matrix6 element_stiffness(const FeMesh& mesh, std::size_t e, double d_e, const MaterialParams& mat) {
    const ElementShape s = element_shapes(mesh).at(e);
    return degradation(d_e, mat) * element_stiffness(s, hooke(mat));
}

int ConstraintSet::add_rigid_link(RigidLink link) {
    links_.push_back(std::move(link));
    return static_cast<int>(links_.size()) - 1;
}

int ConstraintSet::add_tie(int a, int b, bool active) {
    ties_.push_back({a, b, active});
    return static_cast<int>(ties_.size()) - 1;
}

DisplacementSolver::DisplacementSolver(const FeMesh& mesh, const MaterialParams& mat, const ConstraintSet& constraints)
    : mesh_(mesh), mat_(mat), shapes_(element_shapes(mesh)) {
    const Tangent C = hooke(mat_);
    k0_.reserve(shapes_.size());
    for (const ElementShape& s : shapes_) k0_.push_back(element_stiffness(s, C));
    build_map(constraints);
}

void DisplacementSolver::build_map(const ConstraintSet& cs) {
    const int n = static_cast<int>(mesh_.num_nodes());
    auto check_node = [n](int v, const char* what) {
        if (v < 0 || v >= n) throw ConstraintError(std::string(what) + " references missing node " + std::to_string(v));
    };

    UnionFind classes(n);
    const double tie_tol = 1e-10 * mesh_.bbox_diagonal();
    for (const TiePair& t : cs.ties()) {
        check_node(t.a, "tie");
        check_node(t.b, "tie");
        if (distance(mesh_.nodes()[t.a], mesh_.nodes()[t.b]) > tie_tol)
            throw ConstraintError("tied nodes " + std::to_string(t.a) + " and " + std::to_string(t.b) +
                                  " are not coincident");
        if (t.active) classes.unite(t.a, t.b);
    }

    enum class Kind { free, dirichlet, rigid };
    struct RootState {
        Kind kind = Kind::free;
        double value = 0.0;
        double scale = 0.0;
        int link = -1;
        int unknown = -1;
    };
    std::vector<RootState> state(2 * static_cast<std::size_t>(n));

    for (const DirichletEntry& e : cs.dirichlet()) {
        check_node(e.node, "Dirichlet condition");
        if (e.comp != 0 && e.comp != 1) throw ConstraintError("Dirichlet component must be 0 or 1");
        RootState& s = state[2 * classes.find(e.node) + e.comp];
        if (s.kind == Kind::dirichlet && s.value == e.value && s.scale == e.load_scale) continue;
        if (s.kind != Kind::free)
            throw ConstraintError("dof constrained twice: node " + std::to_string(e.node) + " component " +
                                  comp_name(e.comp));
        s.kind = Kind::dirichlet;
        s.value = e.value;
        s.scale = e.load_scale;
    }

    std::vector<std::array<int, 3>> link_unknowns;
    int next = 0;
    for (std::size_t li = 0; li < cs.rigid_links().size(); ++li) {
        const RigidLink& link = cs.rigid_links()[li];
        std::array<int, 3> ids{-1, -1, -1};
        for (int k = 0; k < 3; ++k)
            if (link.params[k].kind == RigidParam::Kind::free) ids[k] = next++;
        link_unknowns.push_back(ids);
        for (int v : link.nodes) {
            check_node(v, "rigid link");
            for (int c = 0; c < 2; ++c) {
                RootState& s = state[2 * classes.find(v) + c];
                if (s.kind == Kind::rigid && s.link == static_cast<int>(li)) continue;
                if (s.kind != Kind::free)
                    throw ConstraintError("dof constrained twice: node " + std::to_string(v) + " component " +
                                          comp_name(c));
                s.kind = Kind::rigid;
                s.link = static_cast<int>(li);
            }
        }
    }

    map_.assign(2 * static_cast<std::size_t>(n), DofMap{});
    for (int v = 0; v < n; ++v) {
        const Point2 x = mesh_.nodes()[v];
        for (int c = 0; c < 2; ++c) {
            RootState& s = state[2 * classes.find(v) + c];
            DofMap& m = map_[2 * v + c];
            switch (s.kind) {
            case Kind::free:
                if (s.unknown < 0) s.unknown = next++;
                m.terms[0] = {s.unknown, 1.0};
                m.count = 1;
                break;
            case Kind::dirichlet:
                m.g0 = s.value;
                m.g1 = s.scale;
                break;
            case Kind::rigid: {
                const RigidLink& link = cs.rigid_links()[s.link];
                const double w_theta = c == 0 ? -(x.y - link.center.y) : (x.x - link.center.x);
                const std::array<double, 3> w{c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0, w_theta};
                for (int k = 0; k < 3; ++k) {
                    if (w[k] == 0.0) continue;
                    const RigidParam& p = link.params[k];
                    if (p.kind == RigidParam::Kind::free)
                        m.terms[m.count++] = {link_unknowns[s.link][k], w[k]};
                    else if (p.kind == RigidParam::Kind::fixed)
                        m.g0 += w[k] * p.value;
                    else
                        m.g1 += w[k] * p.value;
                }
                break;
            }
            }
        }
    }
    num_unknowns_ = next;
}

Eigen::VectorXd DisplacementSolver::expand(const Eigen::VectorXd& q, double load) const {
    Eigen::VectorXd u(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) {
        const DofMap& m = map_[i];
        double v = m.g0 + load * m.g1;
        for (int k = 0; k < m.count; ++k) v += m.terms[k].second * q[m.terms[k].first];
        u[i] = v;
    }
    return u;
}

Eigen::VectorXd DisplacementSolver::restrict_force(const Eigen::VectorXd& f) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(num_unknowns_);
    for (std::size_t i = 0; i < map_.size(); ++i)
        for (int k = 0; k < map_[i].count; ++k) g[map_[i].terms[k].first] += map_[i].terms[k].second * f[i];
    return g;
}

Eigen::SparseMatrix<double> DisplacementSolver::reduce(const std::vector<Matrix6>& blocks,
                                                       const Eigen::VectorXd& u_fixed, Eigen::VectorXd& rhs) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(blocks.size() * 36);
    rhs = Eigen::VectorXd::Zero(num_unknowns_);
    const auto& tris = mesh_.triangles();
    for (std::size_t e = 0; e < blocks.size(); ++e) {
        std::array<int, 6> dofs;
        for (int i = 0; i < 3; ++i) {
            dofs[2 * i] = 2 * tris[e][i];
            dofs[2 * i + 1] = 2 * tris[e][i] + 1;
        }
        for (int a = 0; a < 6; ++a) {
            const DofMap& ma = map_[dofs[a]];
            for (int ka = 0; ka < ma.count; ++ka) {
                const auto [ia, wa] = ma.terms[ka];
                for (int b = 0; b < 6; ++b) {
                    const double kab = blocks[e](a, b);
                    const DofMap& mb = map_[dofs[b]];
                    for (int kb = 0; kb < mb.count; ++kb)
                        trips.emplace_back(ia, mb.terms[kb].first, wa * mb.terms[kb].second * kab);
                    rhs[ia] -= wa * kab * u_fixed[dofs[b]];
                }
            }
        }
    }
    Eigen::SparseMatrix<double> K(num_unknowns_, num_unknowns_);
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

void DisplacementSolver::factorize(const Eigen::SparseMatrix<double>& K) {
    if (!analyzed_) {
        ldlt_.analyzePattern(K);
        analyzed_ = true;
    }
    ldlt_.factorize(K);
    if (ldlt_.info() != Eigen::Success) throw SolverError("equilibrium factorization failed");
    const Eigen::VectorXd D = ldlt_.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    if (!(D.minCoeff() > 1e-14 * dmax))
        throw SolverError("singular equilibrium system: constraints do not remove all rigid motions");
}

Eigen::VectorXd DisplacementSolver::solve_linear(std::span<const double> d, double load) {
    if (d.size() != mesh_.num_elements()) throw std::invalid_argument("damage field size does not match the mesh");
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(num_unknowns_);
    if (num_unknowns_ == 0) return expand(zero, load);
    std::vector<Matrix6> blocks(k0_.size());
    for (std::size_t e = 0; e < k0_.size(); ++e) blocks[e] = degradation(d[e], mat_) * k0_[e];
    Eigen::VectorXd rhs;
    const Eigen::SparseMatrix<double> K = reduce(blocks, expand(zero, load), rhs);
    factorize(K);
    const Eigen::VectorXd q = ldlt_.solve(rhs);
    return expand(q, load);
}

double DisplacementSolver::energy(std::span<const double> d, const Eigen::VectorXd& u) const {
    double w = 0.0;
    const auto& tris = mesh_.triangles();
    for (std::size_t e = 0; e < shapes_.size(); ++e)
        w += shapes_[e].area * free_energy(element_strain(shapes_[e], tris[e], u), d[e], mat_);
    return w;
}

Eigen::VectorXd DisplacementSolver::internal_force(std::span<const double> d, const Eigen::VectorXd& u) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(u.size());
    const auto& tris = mesh_.triangles();
    for (std::size_t e = 0; e < shapes_.size(); ++e) {
        const ElementShape& s = shapes_[e];
        const Stress2D sig = stress(element_strain(s, tris[e], u), d[e], mat_);
        for (int i = 0; i < 3; ++i) {
            f[2 * tris[e][i]] += s.area * (s.bx[i] * sig.xx + s.by[i] * sig.xy);
            f[2 * tris[e][i] + 1] += s.area * (s.by[i] * sig.yy + s.bx[i] * sig.xy);
        }
    }
    return f;
}

Eigen::VectorXd DisplacementSolver::least_squares_q(const Eigen::VectorXd& u, double load) const {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(num_unknowns_);
    for (std::size_t i = 0; i < map_.size(); ++i) {
        const DofMap& m = map_[i];
        const double r = u[i] - m.g0 - load * m.g1;
        for (int a = 0; a < m.count; ++a) {
            rhs[m.terms[a].first] += m.terms[a].second * r;
            for (int b = 0; b < m.count; ++b)
                trips.emplace_back(m.terms[a].first, m.terms[b].first, m.terms[a].second * m.terms[b].second);
        }
    }
    Eigen::SparseMatrix<double> TtT(num_unknowns_, num_unknowns_);
    TtT.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(TtT);
    if (solver.info() != Eigen::Success) return Eigen::VectorXd::Zero(num_unknowns_);
    return solver.solve(rhs);
}

Eigen::VectorXd DisplacementSolver::solve_newton(std::span<const double> d, double load,
                                                 const Eigen::VectorXd* u_init) {
    if (d.size() != mesh_.num_elements()) throw std::invalid_argument("damage field size does not match the mesh");
    energies_.clear();
    Eigen::VectorXd q = Eigen::VectorXd::Zero(num_unknowns_);
    if (num_unknowns_ == 0) return expand(q, load);
    const double ref = std::max(restrict_force(internal_force(d, expand(q, load))).norm(), 1e-300);
    if (u_init != nullptr && u_init->size() == static_cast<Eigen::Index>(map_.size())) q = least_squares_q(*u_init, load);

    const auto& tris = mesh_.triangles();
    Eigen::VectorXd u = expand(q, load);
    double E0 = energy(d, u);
    energies_.push_back(E0);
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd G = restrict_force(internal_force(d, u));
        last_residual_ = G.norm() / ref;
        if (G.norm() <= 1e-8 * ref || G.norm() <= 1e-300) return u;

        std::vector<Matrix6> blocks(shapes_.size());
        for (std::size_t e = 0; e < shapes_.size(); ++e)
            blocks[e] = element_stiffness(shapes_[e], tangent(element_strain(shapes_[e], tris[e], u), d[e], mat_));
        Eigen::VectorXd unused;
        factorize(reduce(blocks, u, unused));
        const Eigen::VectorXd step = -ldlt_.solve(G);
        const double slope = G.dot(step);
        if (!(slope < 0.0)) throw SolverError("Newton direction is not a descent direction");

        double t = 1.0;
        bool accepted = false;
        while (t > 1e-12) {
            const Eigen::VectorXd q_try = q + t * step;
            const Eigen::VectorXd u_try = expand(q_try, load);
            const double E1 = energy(d, u_try);
            if (E1 <= E0 + 1e-4 * t * slope + 1e-13 * std::abs(E0)) {
                q = q_try;
                u = u_try;
                E0 = std::min(E0, E1);
                energies_.push_back(E1);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (last_residual_ <= 1e-6) return u;
            throw SolverError("Newton line search stalled at relative residual " + std::to_string(last_residual_));
        }
    }
    throw SolverError("Newton did not converge: relative residual " + std::to_string(last_residual_));
}

Eigen::VectorXd DisplacementSolver::solve(std::span<const double> d, double load, const Eigen::VectorXd* u_init) {
    if (mat_.beta >= 1.0) return solve_linear(d, load);
    return solve_newton(d, load, u_init);
}

Eigen::VectorXd solve_displacement_linear(const FeMesh& mesh, std::span<const double> d, const ConstraintSet& c,
                                          double load, const MaterialParams& mat) {
    DisplacementSolver solver(mesh, mat, c);
    return solver.solve_linear(d, load);
}

Eigen::VectorXd solve_displacement_newton(const FeMesh& mesh, std::span<const double> d, const ConstraintSet& c,
                                          double load, const MaterialParams& mat, const Eigen::VectorXd* u_init) {
    DisplacementSolver solver(mesh, mat, c);
    return solver.solve_newton(d, load, u_init);
}

Eigen::VectorXd internal_forces(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                                const MaterialParams& mat) {
    const auto shapes = element_shapes(mesh);
    const auto& tris = mesh.triangles();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t e = 0; e < shapes.size(); ++e) {
        const ElementShape& s = shapes[e];
        const Stress2D sig = stress(element_strain(s, tris[e], u), d[e], mat);
        for (int i = 0; i < 3; ++i) {
            f[2 * tris[e][i]] += s.area * (s.bx[i] * sig.xx + s.by[i] * sig.xy);
            f[2 * tris[e][i] + 1] += s.area * (s.by[i] * sig.yy + s.bx[i] * sig.xy);
        }
    }
    return f;
}

Point2 reaction_force(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                      const MaterialParams& mat, std::span<const int> nodes) {
    const Eigen::VectorXd f = internal_forces(mesh, u, d, mat);
    Point2 r;
    for (int v : nodes) {
        r.x += f[2 * v];
        r.y += f[2 * v + 1];
    }
    return r;
}

Point2 reaction_force(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                      const MaterialParams& mat, int tag) {
    const std::vector<int> nodes = mesh.nodes_with_tag(tag);
    return reaction_force(mesh, u, d, mat, std::span<const int>(nodes));
}

double strain_energy(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                     const MaterialParams& mat) {
    const auto shapes = element_shapes(mesh);
    const auto& tris = mesh.triangles();
    double w = 0.0;
    for (std::size_t e = 0; e < shapes.size(); ++e)
        w += shapes[e].area * free_energy(element_strain(shapes[e], tris[e], u), d[e], mat);
    return w;
}

double griffith_gc_from_kic(double E, double nu, double kic_mpa_sqrt_m) {
    // MPa^2 m / MPa = MPa m = N/mm * 1000
    return (1.0 - nu * nu) / E * kic_mpa_sqrt_m * kic_mpa_sqrt_m * 1000.0;
}

CrackPath make_crack_path(const FeMesh& mesh, int tag_a, int tag_b, Point2 origin, double min_distance) {
    const std::vector<int> na = mesh.nodes_with_tag(tag_a);
    const std::vector<int> nb = mesh.nodes_with_tag(tag_b);
    const double tol = 1e-10 * mesh.bbox_diagonal();
    const auto& x = mesh.nodes();
    std::vector<std::pair<double, std::array<int, 2>>> found;
    std::vector<char> used(nb.size(), 0);
    for (int a : na) {
        for (std::size_t j = 0; j < nb.size(); ++j) {
            if (used[j] || nb[j] == a || distance(x[a], x[nb[j]]) > tol) continue;
            used[j] = 1;
            const double r = distance(origin, x[a]);
            if (r >= min_distance - tol) found.push_back({r, {a, nb[j]}});
            break;
        }
    }
    if (found.size() < 3) throw ConstraintError("crack path needs at least 3 coincident node pairs");
    std::sort(found.begin(), found.end());
    CrackPath path;
    for (const auto& f : found) path.pairs.push_back(f.second);
    path.offset = found.front().first;
    path.spacing = (found.back().first - found.front().first) / static_cast<double>(found.size() - 1);
    for (std::size_t i = 1; i < found.size(); ++i) {
        const double gap = distance(x[path.pairs[i][0]], x[path.pairs[i - 1][0]]);
        if (std::abs(gap - path.spacing) > 1e-3 * path.spacing)
            throw ConstraintError("crack path nodes are not regularly spaced");
    }
    return path;
}

GriffithHarness::GriffithHarness(const FeMesh& mesh, const MaterialParams& mat, ConstraintSet base, CrackPath path,
                                 std::vector<int> reaction_nodes, int reaction_comp)
    : mesh_(mesh), mat_(mat), base_(std::move(base)), path_(std::move(path)),
      reaction_nodes_(std::move(reaction_nodes)), reaction_comp_(reaction_comp),
      cache_(path_.pairs.size() + 1) {
    mat_.beta = 1.0;
}

const GriffithHarness::Cached& GriffithHarness::evaluate(int released) {
    if (released < 0 || released > static_cast<int>(path_.pairs.size()))
        throw std::out_of_range("released pair count out of range");
    auto& slot = cache_[released];
    if (!slot) {
        ConstraintSet cs = base_;
        for (std::size_t i = released; i < path_.pairs.size(); ++i) cs.add_tie(path_.pairs[i][0], path_.pairs[i][1]);
        DisplacementSolver solver(mesh_, mat_, cs);
        const std::vector<double> d(mesh_.num_elements(), 0.0);
        const Eigen::VectorXd u = solver.solve_linear(d, 1.0);
        const Point2 r = reaction_force(mesh_, u, d, mat_, std::span<const int>(reaction_nodes_));
        slot = Cached{strain_energy(mesh_, u, d, mat_), reaction_comp_ == 0 ? r.x : r.y};
    }
    return *slot;
}

double GriffithHarness::energy(int released) { return evaluate(released).energy; }
double GriffithHarness::reaction(int released) { return evaluate(released).reaction; }

int GriffithHarness::released_count(double a) const {
    const double h = path_.spacing;
    const long k = std::lround((a - path_.offset) / h);
    if (std::abs(a - path_.offset - static_cast<double>(k) * h) > 1e-6 * h)
        throw std::out_of_range("crack length is not a multiple of the node spacing");
    // At least one pair stays tied: a fully released path may leave a free body.
    if (k < 1 || k + 1 >= static_cast<long>(path_.pairs.size()))
        throw std::out_of_range("crack length " + std::to_string(a) + " outside the admissible range");
    return static_cast<int>(k);
}

double GriffithHarness::release_rate(double a) {
    const int k = released_count(a);
    return (energy(k - 1) - energy(k + 1)) / (2.0 * path_.spacing);
}

std::vector<GriffithRow> GriffithHarness::critical_curves(double Gc) {
    if (!(Gc > 0.0)) throw std::invalid_argument("Gc must be positive");
    std::vector<GriffithRow> rows;
    for (int k = 1; k + 1 < static_cast<int>(path_.pairs.size()); ++k) {
        GriffithRow r;
        r.a = path_.offset + k * path_.spacing;
        r.e1 = energy(k);
        r.G1 = release_rate(r.a);
        r.F1 = reaction(k);
        r.u_c = r.G1 > 0.0 ? std::sqrt(Gc / r.G1) : std::numeric_limits<double>::infinity();
        r.F_c = r.u_c * r.F1;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace lipfield
