#pragma once

#include <array>
#include <stdexcept>

namespace lipfield {

class MaterialError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Plane-strain damage material. Units: MPa, mm.
struct MaterialParams {
    double E = 1.0;
    double nu = 0.2;
    double Yc = 1.0;
    double l = 0.2;
    double eta = 0.1;
    double beta = 1.0;
    double k_res = 1e-6;

    double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
    double mu() const { return E / (2.0 * (1.0 + nu)); }

    /// Throws MaterialError naming the first offending parameter.
    void validate() const;
};

/// In-plane strain tensor (tensor shear component, not engineering shear).
struct Strain2D {
    double xx = 0.0;
    double yy = 0.0;
    double xy = 0.0;

    double trace() const { return xx + yy; }
    /// Eigenvalues e1 <= e2.
    std::array<double, 2> eigenvalues() const;
    /// Unit eigenvector of the smaller eigenvalue; the other one is its
    /// rotation by +90 degrees.
    std::array<double, 2> principal_direction() const;
    Strain2D rotated(double angle) const;
};

/// Symmetric in-plane stress, components (xx, yy, xy).
struct Stress2D {
    double xx = 0.0;
    double yy = 0.0;
    double xy = 0.0;
};

/// Material tangent in Voigt form acting on (exx, eyy, 2 exy).
using Tangent = std::array<std::array<double, 3>, 3>;

double softening_g(double d, double eta);
double softening_dg(double d, double eta);
double softening_d2g(double d, double eta);
double dissipation_h(double d);
double dissipation_dh(double d);

/// Degradation with residual floor: (1 - k) g(d) + k. Used for stiffness,
/// stress, energy and the damage objective alike so that the staggered
/// scheme minimizes a single potential.
double degradation(double d, const MaterialParams& mat);

double free_energy(const Strain2D& eps, double d, const MaterialParams& mat);

/// Symmetric split phi = phi0 + g(d) phi1 (exact for beta = 1).
struct PhiSplit {
    double phi0 = 0.0;
    double phi1 = 0.0;
};
PhiSplit phi_split(const Strain2D& eps, const MaterialParams& mat);

Stress2D stress(const Strain2D& eps, double d, const MaterialParams& mat);
Tangent tangent(const Strain2D& eps, double d, const MaterialParams& mat);
/// Undamaged plane-strain Hooke matrix.
Tangent hooke(const MaterialParams& mat);

double local_objective(const Strain2D& eps, double d, const MaterialParams& mat);

/// f(d) = sum_j c_j gk(a_j d) + Yc h(d) + const, for a fixed strain.
class DamageObjective1D {
public:
    DamageObjective1D(const Strain2D& eps, const MaterialParams& mat);

    double value(double d) const;
    double derivative(double d) const;
    double second_derivative(double d) const;

private:
    struct Term {
        double coef;
        double alpha;
    };
    std::array<Term, 3> terms_{};
    int count_ = 0;
    double constant_ = 0.0;
    double eta_ = 0.0;
    double k_ = 0.0;
    double Yc_ = 0.0;
};

/// Minimizer of f(eps, .) over [d_n, 1] to absolute accuracy tol.
double local_damage_update(const Strain2D& eps, double d_n, const MaterialParams& mat, double tol = 1e-10);
double local_damage_update(const DamageObjective1D& f, double d_n, double tol = 1e-10);

/// Uniaxial strain at which damage starts to grow from d = 0.
double onset_strain(const MaterialParams& mat);
/// Uniaxial strain at which the local update first reaches d = 1.
double saturation_strain(const MaterialParams& mat);

}  // namespace lipfield
