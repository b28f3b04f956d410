#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lipfield/material.hpp"

using namespace lipfield;

namespace {

MaterialParams table1() {
    MaterialParams m;
    m.E = 1.0;
    m.nu = 0.2;
    m.Yc = 1.0;
    m.eta = 0.1;
    m.l = 0.2;
    return m;
}

double fd(auto f, double x, double h = 1e-6) { return (f(x + h) - f(x - h)) / (2.0 * h); }

Strain2D random_strain(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST(Material, LameConstantsOfTableOne) {
    const MaterialParams m = table1();
    EXPECT_NEAR(m.lambda(), 0.2 / (1.2 * 0.6), 1e-15);
    EXPECT_NEAR(m.mu(), 1.0 / 2.4, 1e-15);
}

TEST(Material, ValidateRejectsBadParameters) {
    MaterialParams m = table1();
    EXPECT_NO_THROW(m.validate());
    m.nu = 0.5;
    EXPECT_THROW(m.validate(), MaterialError);
    m = table1();
    m.eta = 0.4;
    EXPECT_THROW(m.validate(), MaterialError);
    m = table1();
    m.l = 0.0;
    EXPECT_THROW(m.validate(), MaterialError);
    m = table1();
    m.beta = 1.5;
    EXPECT_THROW(m.validate(), MaterialError);
}

TEST(Material, SofteningEndpointsAndDerivatives) {
    for (double eta : {0.0, 0.1, 1.0 / 3.0}) {
        EXPECT_DOUBLE_EQ(softening_g(0.0, eta), 1.0);
        EXPECT_DOUBLE_EQ(softening_g(1.0, eta), 0.0);
        for (double d : {0.05, 0.3, 0.5, 0.77, 0.95}) {
            EXPECT_NEAR(softening_dg(d, eta), fd([&](double x) { return softening_g(x, eta); }, d), 1e-8);
            EXPECT_NEAR(softening_d2g(d, eta), fd([&](double x) { return softening_dg(x, eta); }, d), 1e-7);
            // convex on [0, 1] for eta <= 1/3, strictly decreasing
            EXPECT_GE(softening_d2g(d, eta), 0.0);
            EXPECT_LT(softening_dg(d, eta), 0.0);
        }
    }
    EXPECT_THROW(softening_g(1.1, 0.1), std::domain_error);
    EXPECT_THROW(dissipation_h(-0.1), std::domain_error);
}

TEST(Material, DissipationFunction) {
    EXPECT_DOUBLE_EQ(dissipation_h(0.0), 0.0);
    EXPECT_DOUBLE_EQ(dissipation_h(1.0), 5.0);
    EXPECT_NEAR(dissipation_dh(0.4), fd(dissipation_h, 0.4), 1e-8);
}

TEST(Material, EigenvaluesAndDirection) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const Strain2D e = random_strain(rng);
        const auto [e1, e2] = e.eigenvalues();
        EXPECT_LE(e1, e2);
        EXPECT_NEAR(e1 + e2, e.trace(), 1e-14);
        EXPECT_NEAR(e1 * e2, e.xx * e.yy - e.xy * e.xy, 1e-13);
        const auto n = e.principal_direction();
        EXPECT_NEAR(n[0] * n[0] + n[1] * n[1], 1.0, 1e-14);
        EXPECT_NEAR(e.xx * n[0] + e.xy * n[1], e1 * n[0], 1e-12);
        EXPECT_NEAR(e.xy * n[0] + e.yy * n[1], e1 * n[1], 1e-12);
    }
}

TEST(Material, UndamagedEnergyIsHooke) {
    std::mt19937_64 rng(3);
    for (double beta : {1.0, 0.3, 0.0}) {
        MaterialParams m = table1();
        m.beta = beta;
        for (int i = 0; i < 50; ++i) {
            const Strain2D e = random_strain(rng);
            const double lam = m.lambda(), mu = m.mu();
            const double ref = 0.5 * lam * e.trace() * e.trace() +
                               mu * (e.xx * e.xx + e.yy * e.yy + 2.0 * e.xy * e.xy);
            EXPECT_NEAR(free_energy(e, 0.0, m), ref, 1e-13);
        }
    }
}

TEST(Material, SymmetricModelScalesByDegradation) {
    const MaterialParams m = table1();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const Strain2D e = random_strain(rng);
        for (double d : {0.0, 0.2, 0.9, 1.0})
            EXPECT_NEAR(free_energy(e, d, m), degradation(d, m) * free_energy(e, 0.0, m), 1e-13);
    }
}

TEST(Material, CompressionIsUndamagedWhenBetaZero) {
    MaterialParams m = table1();
    m.beta = 0.0;
    const Strain2D e{-0.3, -0.1, 0.05};
    EXPECT_NEAR(free_energy(e, 0.8, m), free_energy(e, 0.0, m), 1e-15);
}

TEST(Material, StressIsEnergyGradient) {
    std::mt19937_64 rng(11);
    for (double beta : {1.0, 0.5, 0.0}) {
        MaterialParams m = table1();
        m.beta = beta;
        for (int i = 0; i < 40; ++i) {
            const Strain2D e = random_strain(rng);
            const double d = 0.6;
            const Stress2D s = stress(e, d, m);
            const double h = 1e-7;
            auto phi = [&](double dxx, double dyy, double dxy) {
                return free_energy({e.xx + dxx, e.yy + dyy, e.xy + dxy}, d, m);
            };
            EXPECT_NEAR(s.xx, (phi(h, 0, 0) - phi(-h, 0, 0)) / (2 * h), 1e-6);
            EXPECT_NEAR(s.yy, (phi(0, h, 0) - phi(0, -h, 0)) / (2 * h), 1e-6);
            // tensor shear: d phi / d exy = 2 sigma_xy
            EXPECT_NEAR(2.0 * s.xy, (phi(0, 0, h) - phi(0, 0, -h)) / (2 * h), 1e-6);
        }
    }
}

TEST(Material, TangentIsStressJacobian) {
    std::mt19937_64 rng(13);
    for (double beta : {1.0, 0.4, 0.0}) {
        MaterialParams m = table1();
        m.beta = beta;
        for (int i = 0; i < 40; ++i) {
            const Strain2D e = random_strain(rng);
            const double d = 0.45;
            const Tangent D = tangent(e, d, m);
            const double h = 1e-7;
            // Voigt: (exx, eyy, gamma = 2 exy)
            for (int c = 0; c < 3; ++c) {
                Strain2D ep = e, em = e;
                if (c == 0) ep.xx += h, em.xx -= h;
                if (c == 1) ep.yy += h, em.yy -= h;
                if (c == 2) ep.xy += 0.5 * h, em.xy -= 0.5 * h;
                const Stress2D sp = stress(ep, d, m), sm = stress(em, d, m);
                EXPECT_NEAR(D[0][c], (sp.xx - sm.xx) / (2 * h), 1e-5);
                EXPECT_NEAR(D[1][c], (sp.yy - sm.yy) / (2 * h), 1e-5);
                EXPECT_NEAR(D[2][c], (sp.xy - sm.xy) / (2 * h), 1e-5);
            }
        }
    }
}

TEST(Material, TangentAtZeroDamageIsHooke) {
    const MaterialParams m = table1();
    const Tangent D = tangent({0.1, -0.2, 0.03}, 0.0, m);
    const Tangent H = hooke(m);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(D[i][j], H[i][j], 1e-14);
}

TEST(Material, PhiSplitIdentityInBiaxialTension) {
    const MaterialParams m = table1();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Strain2D e = Strain2D{u(rng), u(rng), 0.0}.rotated(u(rng) * 6.0);
        const PhiSplit s = phi_split(e, m);
        EXPECT_DOUBLE_EQ(s.phi0, 0.0);
        for (double d : {0.0, 0.5, 1.0})
            EXPECT_NEAR(s.phi0 + degradation(d, m) * s.phi1, free_energy(e, d, m), 1e-13);
    }
}

TEST(Material, PhiSplitPartsAreNonNegativeAndSumToHooke) {
    const MaterialParams m = table1();
    std::mt19937_64 rng(19);
    for (int i = 0; i < 100; ++i) {
        const Strain2D e = random_strain(rng);
        const PhiSplit s = phi_split(e, m);
        EXPECT_GE(s.phi0, 0.0);
        EXPECT_GE(s.phi1, 0.0);
        EXPECT_NEAR(s.phi0 + s.phi1, free_energy(e, 0.0, m), 1e-13);
    }
}

TEST(Material, DamageObjectiveMatchesLocalObjective) {
    std::mt19937_64 rng(23);
    for (double beta : {1.0, 0.2, 0.0}) {
        MaterialParams m = table1();
        m.beta = beta;
        for (int i = 0; i < 30; ++i) {
            const Strain2D e = random_strain(rng, 3.0);
            const DamageObjective1D f(e, m);
            EXPECT_NEAR(f.value(0.0), local_objective(e, 0.0, m), 1e-12 * (1.0 + std::abs(f.value(0.0))));
            for (double d : {0.25, 0.5, 0.99}) {
                EXPECT_NEAR(f.value(d), local_objective(e, d, m), 1e-12 * (1.0 + std::abs(f.value(d))));
                EXPECT_NEAR(f.derivative(d), fd([&](double x) { return f.value(x); }, d), 1e-6);
                EXPECT_NEAR(f.second_derivative(d), fd([&](double x) { return f.derivative(x); }, d), 1e-5);
                EXPECT_GT(f.second_derivative(d), 0.0);
            }
        }
    }
}

TEST(Material, LocalUpdateMatchesGridSearch) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MaterialParams m = table1();
    for (int i = 0; i < 60; ++i) {
        m.beta = i % 3 == 0 ? 1.0 : 0.3;
        const Strain2D e = random_strain(rng, 4.0);
        const double d_n = 0.5 * u(rng);
        const double d = local_damage_update(e, d_n, m);
        // golden-section oracle on the convex objective
        double a = d_n, b = 1.0;
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int k = 0; k < 200; ++k) {
            const double x1 = b - r * (b - a), x2 = a + r * (b - a);
            if (local_objective(e, x1, m) < local_objective(e, x2, m))
                b = x2;
            else
                a = x1;
        }
        EXPECT_NEAR(d, 0.5 * (a + b), 1e-7);
        EXPECT_GE(d, d_n);
        EXPECT_LE(d, 1.0);
    }
}

TEST(Material, LocalUpdateRespectsIrreversibility) {
    const MaterialParams m = table1();
    EXPECT_DOUBLE_EQ(local_damage_update(Strain2D{}, 0.4, m), 0.4);
    EXPECT_DOUBLE_EQ(local_damage_update(Strain2D{}, 1.0, m), 1.0);
    EXPECT_THROW(local_damage_update(Strain2D{}, 1.5, m), std::domain_error);
}

TEST(Material, OnsetStrainOracle) {
    const MaterialParams m = table1();
    // f'(0) = 0 on uniaxial strain: (1 - k) (lambda + 2 mu) eps^2 = 2 Yc
    const double c = (1.0 - m.k_res) * (m.lambda() + 2.0 * m.mu());
    EXPECT_NEAR(onset_strain(m), std::sqrt(2.0 * m.Yc / c), 1e-15);
    const double eps0 = onset_strain(m);
    EXPECT_DOUBLE_EQ(local_damage_update(Strain2D{0.999 * eps0, 0.0, 0.0}, 0.0, m), 0.0);
    EXPECT_GT(local_damage_update(Strain2D{1.001 * eps0, 0.0, 0.0}, 0.0, m), 0.0);
}

TEST(Material, SaturationStrainOracle) {
    for (double eta : {0.3, 0.1, 0.03}) {
        MaterialParams m = table1();
        m.eta = eta;
        // f'(1) = -(1 - k) eta (lambda + 2 mu) eps^2 / 2 + 8 Yc
        const double es = std::sqrt(16.0 * m.Yc / ((1.0 - m.k_res) * eta * (m.lambda() + 2.0 * m.mu())));
        EXPECT_NEAR(saturation_strain(m), es, 1e-12 * es);
        EXPECT_LT(local_damage_update(Strain2D{0.999 * es, 0.0, 0.0}, 0.0, m), 1.0);
        EXPECT_DOUBLE_EQ(local_damage_update(Strain2D{1.001 * es, 0.0, 0.0}, 0.0, m), 1.0);
    }
    MaterialParams m = table1();
    m.eta = 0.0;
    EXPECT_THROW(saturation_strain(m), std::domain_error);
}
