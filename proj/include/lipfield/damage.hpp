#pragma once

#include <span>
#include <vector>

#include "lipfield/bounds.hpp"
#include "lipfield/cone_solver.hpp"
#include "lipfield/lip_mesh.hpp"
#include "lipfield/material.hpp"

namespace lipfield {

/// Componentwise local minimizer of f over [d_n, 1].
std::vector<double> local_field_update(std::span<const Strain2D> strains, std::span<const double> d_n,
                                       const MaterialParams& mat, double tol = 1e-10);

/// Subdomain on which the constrained minimization runs.
struct Patch {
    std::vector<char> frozen;          // V^l, per Lip vertex
    std::vector<double> value;         // frozen values (d_loc), initial guess elsewhere
    std::vector<double> lower;         // box per vertex
    std::vector<double> upper;
    std::vector<int> active_triangles;  // T \ T^l

    std::size_t num_active_vertices() const;
};

/// Freezes vertices whose bounds coincide to tol_eq, or whose box is
/// degenerate (d_n = 1); active boxes are [d_n, 1].
Patch extract_patch(const BoundsPair& bounds, std::span<const double> d_loc, std::span<const double> d_n,
                    const LipMesh& lip, double tol_eq = 1e-9);

/// Recomputes active_triangles as the triangles touching a non-frozen vertex.
void refresh_active_triangles(Patch& patch, const LipMesh& lip);

struct MinimizeResult {
    std::vector<double> d;
    /// Cone multipliers, indexed like patch.active_triangles.
    std::vector<Point2> multipliers;
    int outer_iterations = 0;
    int inner_iterations = 0;
    bool converged = true;
    bool stalled = false;
    double violation = 0.0;
    double stationarity = 0.0;
};

/// Minimizes sum_e A_e f(eps_e, d_e) over the patch: frozen vertices fixed,
/// box on active vertices, |grad d| <= 1/l on active triangles.
MinimizeResult constrained_damage_minimize(std::span<const Strain2D> strains, std::span<const double> areas,
                                           const Patch& patch, const LipMesh& lip, const MaterialParams& mat,
                                           const ConeSolverOptions& options = {},
                                           const std::vector<Point2>* warm_multipliers = nullptr);

struct DamageTolerances {
    double local = 1e-10;     // scalar local update
    double eq = 1e-9;         // bound coincidence
    double lip = 1e-8;        // Step 4 gradient excess
    double release = 1e-8;    // KKT residual (damage units) that releases a frozen vertex
    ConeSolverOptions cone{};
    bool patching = true;     // false: minimize over the whole Lip-mesh
};

struct DamageStepInfo {
    int passes = 0;
    std::size_t active_vertices = 0;
    int released_lipschitz = 0;
    int released_kkt = 0;
    int released_infeasible = 0;  // grown after a patch problem had no feasible point
    int outer_iterations = 0;
    int inner_iterations = 0;
    double max_violation = 0.0;  // Lh excess of the result
};

/// One damage update at fixed strains: local update, envelopes, patch
/// extraction and constrained minimization with patch growth until the
/// result is Lipschitz and stationary.
std::vector<double> damage_step(std::span<const Strain2D> strains, std::span<const double> areas,
                                std::span<const double> d_n, const LipMesh& lip, const EdgeGraph& graph,
                                const MaterialParams& mat, const DamageTolerances& tol = {},
                                DamageStepInfo* info = nullptr);

/// Consistent-mass L2 projection onto the per-triangle Lipschitz set.
std::vector<double> lip_project_L2(std::span<const double> d_in, const LipMesh& lip, double l,
                                   const ConeSolverOptions& options = {});

/// Consistent mass matrix of linear triangles.
Eigen::SparseMatrix<double> consistent_mass(const LipMesh& lip);

}  // namespace lipfield
