#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "lipfield/equilibrium.hpp"
#include "meshgen.hpp"

using namespace lipfield;

namespace {

MaterialParams elastic() {
    MaterialParams m;
    m.E = 210.0;
    m.nu = 0.3;
    return m;
}

// Pure uniaxial stretch of [0,Lx]x[0,Ly]: ux = 0 on the left, ux = load on
// the right, one pin against vertical translation.
ConstraintSet uniaxial(const FeMesh& mesh) {
    ConstraintSet c;
    for (int n : mesh.nodes_with_tag(meshgen::left)) c.fix(n, 0);
    for (int n : mesh.nodes_with_tag(meshgen::right)) c.prescribe(n, 0, 1.0);
    c.fix(mesh.nearest_node({0.0, 0.0}), 1);
    return c;
}

}  // namespace

TEST(Equilibrium, ElementStiffnessIsSymmetricWithRigidKernel) {
    const FeMesh mesh(meshgen::perturbed_rectangle(1.0, 1.0, 3, 3, 0.2, 1));
    const auto shapes = element_shapes(mesh);
    const MaterialParams m = elastic();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Matrix6 K = element_stiffness(shapes[e], hooke(m));
        EXPECT_NEAR((K - K.transpose()).norm(), 0.0, 1e-12 * K.norm());
        const Tri& t = mesh.triangles()[e];
        Eigen::Matrix<double, 6, 1> tx, ty, rot;
        for (int a = 0; a < 3; ++a) {
            const Point2 p = mesh.nodes()[t[a]];
            tx.segment<2>(2 * a) << 1.0, 0.0;
            ty.segment<2>(2 * a) << 0.0, 1.0;
            rot.segment<2>(2 * a) << -p.y, p.x;
        }
        EXPECT_NEAR((K * tx).norm(), 0.0, 1e-10 * K.norm());
        EXPECT_NEAR((K * ty).norm(), 0.0, 1e-10 * K.norm());
        EXPECT_NEAR((K * rot).norm(), 0.0, 1e-10 * K.norm());
        Eigen::SelfAdjointEigenSolver<Matrix6> es(K);
        EXPECT_GT(es.eigenvalues()[3], 0.0);
    }
}

TEST(Equilibrium, PatchTestReproducesLinearField) {
    const FeMesh mesh(meshgen::perturbed_rectangle(2.0, 1.0, 6, 4, 0.2, 7));
    auto exact = [](Point2 p) { return Point2{0.01 * p.x - 0.003 * p.y + 0.1, 0.002 * p.x + 0.007 * p.y}; };
    ConstraintSet c;
    for (const TaggedEdge& e : mesh.boundary_edges())
        for (int n : e.nodes) {
            const Point2 u = exact(mesh.nodes()[n]);
            c.add_dirichlet({n, 0, u.x, 0.0});
            c.add_dirichlet({n, 1, u.y, 0.0});
        }
    const std::vector<double> d(mesh.num_elements(), 0.0);
    const Eigen::VectorXd u = solve_displacement_linear(mesh, d, c, 0.0, elastic());
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        const Point2 ue = exact(mesh.nodes()[n]);
        EXPECT_NEAR(u[2 * n], ue.x, 1e-13);
        EXPECT_NEAR(u[2 * n + 1], ue.y, 1e-13);
    }
    for (const Strain2D& s : element_strains(mesh, u)) {
        EXPECT_NEAR(s.xx, 0.01, 1e-12);
        EXPECT_NEAR(s.yy, 0.007, 1e-12);
        EXPECT_NEAR(s.xy, 0.5 * (-0.003 + 0.002), 1e-12);
    }
}

TEST(Equilibrium, UniaxialReactionMatchesPlaneStrainModulus) {
    const double Lx = 2.0, Ly = 1.0, load = 0.01;
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, Lx, Ly, 8, 4));
    const MaterialParams m = elastic();
    for (double d0 : {0.0, 0.5}) {
        const std::vector<double> d(mesh.num_elements(), d0);
        const Eigen::VectorXd u = solve_displacement_linear(mesh, d, uniaxial(mesh), load, m);
        const double modulus = m.E / (1.0 - m.nu * m.nu) * degradation(d0, m);
        const Point2 r = reaction_force(mesh, u, d, m, meshgen::right);
        EXPECT_NEAR(r.x, modulus * load / Lx * Ly, 1e-10);
        EXPECT_NEAR(r.y, 0.0, 1e-10);
        const Point2 rl = reaction_force(mesh, u, d, m, meshgen::left);
        EXPECT_NEAR(rl.x, -r.x, 1e-10);
        EXPECT_NEAR(strain_energy(mesh, u, d, m), 0.5 * r.x * load, 1e-12);
    }
}

TEST(Equilibrium, DuplicateConstraintsAreRejected) {
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, 1, 1, 2, 2));
    ConstraintSet c = uniaxial(mesh);
    c.fix(0, 0);  // identical duplicate: accepted
    EXPECT_NO_THROW(DisplacementSolver(mesh, elastic(), c));
    c.fix(0, 0, 0.5);
    EXPECT_THROW(DisplacementSolver(mesh, elastic(), c), ConstraintError);
}

TEST(Equilibrium, UnconstrainedSystemIsSolverError) {
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, 1, 1, 2, 2));
    ConstraintSet c;
    for (int n : mesh.nodes_with_tag(meshgen::left)) c.fix(n, 0);
    const std::vector<double> d(mesh.num_elements(), 0.0);
    EXPECT_THROW(solve_displacement_linear(mesh, d, c, 1.0, elastic()), SolverError);
}

TEST(Equilibrium, RigidLinkMatchesDirichletForUniformStretch) {
    // Without Poisson contraction the rigid edge does not constrain the stretch.
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, 2, 1, 6, 3));
    MaterialParams m = elastic();
    m.nu = 0.0;
    ConstraintSet c;
    for (int n : mesh.nodes_with_tag(meshgen::left)) c.fix(n, 0);
    c.fix(mesh.nearest_node({0.0, 0.0}), 1);
    RigidLink link;
    link.nodes = mesh.nodes_with_tag(meshgen::right);
    link.center = {2.0, 0.5};
    link.params = {RigidParam::loaded(1.0), RigidParam::unknown(), RigidParam::unknown()};
    c.add_rigid_link(link);
    const std::vector<double> d(mesh.num_elements(), 0.0);
    const Eigen::VectorXd a = solve_displacement_linear(mesh, d, c, 0.02, m);
    const Eigen::VectorXd b = solve_displacement_linear(mesh, d, uniaxial(mesh), 0.02, m);
    EXPECT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Equilibrium, RigidLinkKeepsEdgeStraight) {
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, 2, 1, 6, 4));
    ConstraintSet c;
    for (int n : mesh.nodes_with_tag(meshgen::left)) {
        c.fix(n, 0);
        c.fix(n, 1);
    }
    RigidLink link;
    link.nodes = mesh.nodes_with_tag(meshgen::right);
    link.center = {2.0, 0.5};
    link.params = {RigidParam::unknown(), RigidParam::loaded(1.0), RigidParam::unknown()};
    c.add_rigid_link(link);
    const std::vector<double> d(mesh.num_elements(), 0.0);
    const Eigen::VectorXd u = solve_displacement_linear(mesh, d, c, 0.05, elastic());
    const int mid = mesh.nearest_node({2.0, 0.5});
    EXPECT_NEAR(u[2 * mid + 1], 0.05, 1e-14);
    const int lo = mesh.nearest_node({2.0, 0.0}), hi = mesh.nearest_node({2.0, 1.0});
    EXPECT_NEAR(u[2 * lo] + u[2 * hi], 2.0 * u[2 * mid], 1e-14);
    EXPECT_NEAR(u[2 * lo + 1], u[2 * hi + 1], 1e-14);
    EXPECT_GT(std::abs(u[2 * lo] - u[2 * hi]), 1e-4);  // the link rotates under bending
}

TEST(Equilibrium, FullyTiedHalvesMatchMergedMesh) {
    const double Lx = 2.0, H = 0.5;
    const FeMesh split(meshgen::two_half_strip(Lx, H, 8, 2));
    const FeMesh merged(meshgen::structured_rectangle(0, -H, Lx, H, 8, 4));
    const MaterialParams m = elastic();
    auto build = [&](const FeMesh& mesh, bool tie) {
        ConstraintSet c;
        for (const Point2 p : {Point2{0, -H}, Point2{0, 0.0}, Point2{0, H}}) c.fix(mesh.nearest_node(p), 0);
        c.fix(mesh.nearest_node({0, -H}), 1);
        for (const Point2 p : {Point2{Lx, -H}, Point2{Lx, H}}) c.prescribe(mesh.nearest_node(p), 0, 1.0);
        if (tie) {
            const CrackPath path = make_crack_path(mesh, meshgen::crack_upper, meshgen::crack_lower, {0, 0});
            for (const auto& pr : path.pairs) c.add_tie(pr[0], pr[1]);
        }
        return c;
    };
    const std::vector<double> ds(split.num_elements(), 0.0), dm(merged.num_elements(), 0.0);
    const Eigen::VectorXd us = solve_displacement_linear(split, ds, build(split, true), 0.01, m);
    const Eigen::VectorXd um = solve_displacement_linear(merged, dm, build(merged, false), 0.01, m);
    EXPECT_NEAR(strain_energy(split, us, ds, m), strain_energy(merged, um, dm, m), 1e-12);
    for (std::size_t n = 0; n < split.num_nodes(); ++n) {
        const int k = merged.nearest_node(split.nodes()[n]);
        EXPECT_NEAR(us[2 * n], um[2 * k], 1e-12);
        EXPECT_NEAR(us[2 * n + 1], um[2 * k + 1], 1e-12);
    }
}

TEST(Equilibrium, NewtonAgreesWithLinearForSymmetricModel) {
    const FeMesh mesh(meshgen::perturbed_rectangle(2.0, 1.0, 6, 3, 0.2, 3));
    const MaterialParams m = elastic();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 0.9);
    std::vector<double> d(mesh.num_elements());
    for (double& x : d) x = u(rng);
    const ConstraintSet c = uniaxial(mesh);
    const Eigen::VectorXd a = solve_displacement_linear(mesh, d, c, 0.01, m);
    const Eigen::VectorXd b = solve_displacement_newton(mesh, d, c, 0.01, m);
    EXPECT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Equilibrium, NewtonAsymmetricModelIsEquilibrated) {
    const FeMesh mesh(meshgen::perturbed_rectangle(2.0, 1.0, 8, 4, 0.2, 9));
    MaterialParams m = elastic();
    m.beta = 0.0;
    std::vector<double> d(mesh.num_elements());
    for (std::size_t e = 0; e < d.size(); ++e) d[e] = mesh.centroids()[e].x < 1.0 ? 0.8 : 0.1;
    ConstraintSet c;
    for (int n : mesh.nodes_with_tag(meshgen::left)) {
        c.fix(n, 0);
        c.fix(n, 1);
    }
    for (int n : mesh.nodes_with_tag(meshgen::right)) {
        c.prescribe(n, 0, -0.5);
        c.prescribe(n, 1, 1.0);
    }
    DisplacementSolver solver(mesh, m, c);
    const Eigen::VectorXd u = solver.solve(d, 0.02);
    const auto& E = solver.newton_energies();
    ASSERT_GE(E.size(), 2u);
    for (std::size_t k = 1; k < E.size(); ++k) EXPECT_LE(E[k], E[k - 1] + 1e-13 * std::abs(E[0]));
    // interior nodes carry no residual force
    const Eigen::VectorXd f = internal_forces(mesh, u, d, m);
    const auto left = mesh.nodes_with_tag(meshgen::left), right = mesh.nodes_with_tag(meshgen::right);
    double fmax = 0.0, fref = 0.0;
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        fref = std::max(fref, f.segment<2>(2 * n).cwiseAbs().maxCoeff());
        if (std::binary_search(left.begin(), left.end(), n) || std::binary_search(right.begin(), right.end(), n))
            continue;
        fmax = std::max(fmax, f.segment<2>(2 * n).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(fmax, 1e-8 * fref);
}

TEST(Equilibrium, GcFromKic) {
    // (1 - nu^2) / E * K^2, K in MPa sqrt(m) and 1 m = 1000 mm
    EXPECT_NEAR(griffith_gc_from_kic(30000.0, 0.2, 2.0), 0.96 / 30000.0 * 4.0 * 1000.0, 1e-15);
}

TEST(Griffith, CrackPathPairsAreOrdered) {
    const FeMesh mesh(meshgen::two_half_strip(2.0, 0.5, 8, 2));
    const CrackPath p = make_crack_path(mesh, meshgen::crack_upper, meshgen::crack_lower, {0, 0});
    ASSERT_EQ(p.pairs.size(), 9u);
    EXPECT_NEAR(p.spacing, 0.25, 1e-15);
    for (std::size_t k = 0; k < p.pairs.size(); ++k) {
        EXPECT_EQ(mesh.nodes()[p.pairs[k][0]], mesh.nodes()[p.pairs[k][1]]);
        EXPECT_NEAR(mesh.nodes()[p.pairs[k][0]].x, 0.25 * k, 1e-15);
    }
}

namespace {

GriffithHarness dcb_harness(const FeMesh& mesh, const MaterialParams& m) {
    ConstraintSet c;
    RigidLink lower;
    lower.nodes = mesh.nodes_with_tag(meshgen::left_lower);
    lower.center = {0.0, -0.25};
    lower.params = {RigidParam::fixed(0.0), RigidParam::fixed(0.0), RigidParam::unknown()};
    RigidLink upper;
    upper.nodes = mesh.nodes_with_tag(meshgen::left_upper);
    upper.center = {0.0, 0.25};
    upper.params = {RigidParam::fixed(0.0), RigidParam::loaded(1.0), RigidParam::unknown()};
    c.add_rigid_link(lower);
    c.add_rigid_link(upper);
    // The pair on the loaded edge belongs to both links and stays open.
    const CrackPath probe = make_crack_path(mesh, meshgen::crack_upper, meshgen::crack_lower, {0, 0});
    return GriffithHarness(mesh, m, c,
                           make_crack_path(mesh, meshgen::crack_upper, meshgen::crack_lower, {0, 0}, probe.spacing),
                           mesh.nodes_with_tag(meshgen::left_upper), 1);
}

}  // namespace

TEST(Griffith, EnergyDecreasesAndCriticalLoadScales) {
    const FeMesh mesh(meshgen::two_half_strip(4.0, 0.5, 32, 4));
    const MaterialParams m = elastic();
    GriffithHarness g = dcb_harness(mesh, m);
    const auto rows = g.critical_curves(0.01);
    const auto rows2 = g.critical_curves(0.02);
    ASSERT_EQ(rows.size(), g.num_pairs() - 2);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k > 0) {
            EXPECT_LT(rows[k].e1, rows[k - 1].e1);
        }
        EXPECT_GT(rows[k].G1, 0.0);
        EXPECT_TRUE(std::isfinite(rows[k].u_c));
        EXPECT_GT(rows[k].u_c, 0.0);
        EXPECT_NEAR(rows2[k].u_c / rows[k].u_c, std::sqrt(2.0), 1e-12 * std::sqrt(2.0));
    }
    EXPECT_THROW(g.release_rate(0.0), std::out_of_range);
    EXPECT_THROW(g.release_rate(4.0), std::out_of_range);
    EXPECT_THROW(g.release_rate(0.3), std::out_of_range);
}

TEST(Griffith, ReleaseRateMatchesBeamTheoryOrder) {
    // Slender arms under imposed opening: G ~ a^-4, softened by root rotation.
    const FeMesh mesh(meshgen::two_half_strip(8.0, 0.5, 64, 4));
    GriffithHarness g = dcb_harness(mesh, elastic());
    const double r = g.release_rate(2.0) / g.release_rate(4.0);
    EXPECT_GT(r, 6.0);
    EXPECT_LT(r, 20.0);
}
