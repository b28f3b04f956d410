#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

#include "lipfield/errors.hpp"
#include "lipfield/material.hpp"
#include "lipfield/mesh.hpp"

namespace lipfield {

/// Ill-posed constraint input (dof constrained twice, non-coincident tie).
class ConstraintError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Constant shape-function gradients of a linear triangle.
struct ElementShape {
    std::array<double, 3> bx{};
    std::array<double, 3> by{};
    double area = 0.0;
};

std::vector<ElementShape> element_shapes(const FeMesh& mesh);

/// Displacement vectors are laid out as u[2 * node + component].
Strain2D element_strain(const ElementShape& s, const Tri& tri, const Eigen::VectorXd& u);
std::vector<Strain2D> element_strains(const FeMesh& mesh, const Eigen::VectorXd& u);

Matrix6 element_stiffness(const ElementShape& s, const Tangent& D);
/// Symmetric-model stiffness: degradation(d_e) times the undamaged block.
Matrix6 element_stiffness(const FeMesh& mesh, std::size_t e, double d_e, const MaterialParams& mat);

/// u = value + load * load_scale on one nodal component.
struct DirichletEntry {
    int node = 0;
    int comp = 0;
    double value = 0.0;
    double load_scale = 0.0;
};

/// One parameter of a linearized rigid motion.
struct RigidParam {
    enum class Kind { fixed, loaded, free };
    Kind kind = Kind::free;
    double value = 0.0;  // fixed value, or load scale

    static RigidParam fixed(double v) { return {Kind::fixed, v}; }
    static RigidParam loaded(double scale) { return {Kind::loaded, scale}; }
    static RigidParam unknown() { return {Kind::free, 0.0}; }
};

/// Nodes moving as u = (ux - theta (y - cy), uy + theta (x - cx)).
struct RigidLink {
    std::vector<int> nodes;
    Point2 center;
    std::array<RigidParam, 3> params{};  // ux, uy, theta
};

struct TiePair {
    int a = 0;
    int b = 0;
    bool active = true;
};

class ConstraintSet {
public:
    void add_dirichlet(const DirichletEntry& entry) { dirichlet_.push_back(entry); }
    void fix(int node, int comp, double value = 0.0) { dirichlet_.push_back({node, comp, value, 0.0}); }
    void prescribe(int node, int comp, double load_scale) { dirichlet_.push_back({node, comp, 0.0, load_scale}); }
    int add_rigid_link(RigidLink link);
    int add_tie(int a, int b, bool active = true);
    void set_tie_active(int index, bool active) { ties_.at(index).active = active; }

    const std::vector<DirichletEntry>& dirichlet() const { return dirichlet_; }
    const std::vector<RigidLink>& rigid_links() const { return links_; }
    const std::vector<TiePair>& ties() const { return ties_; }

private:
    std::vector<DirichletEntry> dirichlet_;
    std::vector<RigidLink> links_;
    std::vector<TiePair> ties_;
};

/// Displacement solver at fixed damage. Constraints are eliminated through
/// u = T q + g0 + load * g1, which keeps the reduced system symmetric
/// positive definite whenever rigid modes are suppressed.
class DisplacementSolver {
public:
    DisplacementSolver(const FeMesh& mesh, const MaterialParams& mat, const ConstraintSet& constraints);

    /// Linear solve with the symmetric model (beta = 1).
    Eigen::VectorXd solve_linear(std::span<const double> d, double load);
    /// Newton solve with line search for the asymmetric model.
    Eigen::VectorXd solve_newton(std::span<const double> d, double load, const Eigen::VectorXd* u_init = nullptr);
    /// Dispatches on mat.beta.
    Eigen::VectorXd solve(std::span<const double> d, double load, const Eigen::VectorXd* u_init = nullptr);

    int num_unknowns() const { return num_unknowns_; }
    const std::vector<ElementShape>& shapes() const { return shapes_; }

    /// Newton diagnostics of the last call.
    const std::vector<double>& newton_energies() const { return energies_; }
    double last_residual() const { return last_residual_; }

private:
    struct DofMap {
        std::array<std::pair<int, double>, 2> terms{};
        int count = 0;
        double g0 = 0.0;
        double g1 = 0.0;
    };

    const FeMesh& mesh_;
    MaterialParams mat_;
    std::vector<ElementShape> shapes_;
    std::vector<Matrix6> k0_;
    std::vector<DofMap> map_;
    int num_unknowns_ = 0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analyzed_ = false;
    std::vector<double> energies_;
    double last_residual_ = 0.0;

    void build_map(const ConstraintSet& constraints);
    Eigen::VectorXd expand(const Eigen::VectorXd& q, double load) const;
    Eigen::VectorXd restrict_force(const Eigen::VectorXd& f) const;
    Eigen::SparseMatrix<double> reduce(const std::vector<Matrix6>& blocks, const Eigen::VectorXd& u_fixed,
                                       Eigen::VectorXd& rhs) const;
    void factorize(const Eigen::SparseMatrix<double>& K);
    double energy(std::span<const double> d, const Eigen::VectorXd& u) const;
    Eigen::VectorXd internal_force(std::span<const double> d, const Eigen::VectorXd& u) const;
    Eigen::VectorXd least_squares_q(const Eigen::VectorXd& u, double load) const;
};

Eigen::VectorXd solve_displacement_linear(const FeMesh& mesh, std::span<const double> d, const ConstraintSet& c,
                                          double load, const MaterialParams& mat);
Eigen::VectorXd solve_displacement_newton(const FeMesh& mesh, std::span<const double> d, const ConstraintSet& c,
                                          double load, const MaterialParams& mat,
                                          const Eigen::VectorXd* u_init = nullptr);

/// Nodal internal forces (N/mm), sum over elements of A B^T sigma.
Eigen::VectorXd internal_forces(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                                const MaterialParams& mat);

/// Sum of nodal reactions over the nodes of a boundary tag.
Point2 reaction_force(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                      const MaterialParams& mat, int tag);
Point2 reaction_force(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                      const MaterialParams& mat, std::span<const int> nodes);

/// Sum over elements of A_e phi(eps_e, d_e) (N mm per unit thickness).
double strain_energy(const FeMesh& mesh, const Eigen::VectorXd& u, std::span<const double> d,
                     const MaterialParams& mat);

/// Plane-strain critical energy release rate in N/mm from K_Ic in MPa sqrt(m).
double griffith_gc_from_kic(double E, double nu, double kic_mpa_sqrt_m);

/// Coincident node pairs along a split crack path, ordered from its origin.
struct CrackPath {
    std::vector<std::array<int, 2>> pairs;
    double spacing = 0.0;
    double offset = 0.0;  // distance from the origin to the first pair
};

/// Pairs the nodes of two tags by position; spacing must be uniform. Pairs
/// closer than `min_distance` to the origin are left out (initial crack).
CrackPath make_crack_path(const FeMesh& mesh, int tag_a, int tag_b, Point2 origin, double min_distance = 0.0);

struct GriffithRow {
    double a = 0.0;
    double e1 = 0.0;
    double G1 = 0.0;
    double F1 = 0.0;
    double u_c = 0.0;
    double F_c = 0.0;
};

/// Griffith node-release analysis at zero damage and unit load factor.
class GriffithHarness {
public:
    /// `base` carries the loading; ties along `path` are added internally.
    /// The reaction is read on `reaction_nodes`, component `reaction_comp`.
    GriffithHarness(const FeMesh& mesh, const MaterialParams& mat, ConstraintSet base, CrackPath path,
                    std::vector<int> reaction_nodes, int reaction_comp);

    std::size_t num_pairs() const { return path_.pairs.size(); }
    double spacing() const { return path_.spacing; }

    /// Strain energy with the first `released` pairs untied.
    double energy(int released);
    double reaction(int released);
    /// Central difference (e1(a - h) - e1(a + h)) / 2h. The crack length a is
    /// measured from the path origin to the first tied pair; a - offset must
    /// be a positive multiple of the spacing leaving at least two pairs tied.
    double release_rate(double a);
    std::vector<GriffithRow> critical_curves(double Gc);

private:
    const FeMesh& mesh_;
    MaterialParams mat_;
    ConstraintSet base_;
    CrackPath path_;
    std::vector<int> reaction_nodes_;
    int reaction_comp_ = 1;
    struct Cached {
        double energy;
        double reaction;
    };
    std::vector<std::optional<Cached>> cache_;

    const Cached& evaluate(int released);
    int released_count(double a) const;
};

}  // namespace lipfield
