#include "lipfield/material.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lipfield {

namespace {

void check_unit_interval(double d, const char* what) {
    if (!(d >= 0.0 && d <= 1.0))
        throw std::domain_error(std::string(what) + ": damage " + std::to_string(d) + " outside [0, 1]");
}

double alpha_of(double e, double beta) { return e < 0.0 ? beta : 1.0; }

using Voigt = std::array<double, 3>;

void add_outer(Tangent& D, double c, const Voigt& a) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) D[i][j] += c * a[i] * a[j];
}

}  // namespace

void MaterialParams::validate() const {
    auto fail = [](const std::string& msg) { throw MaterialError(msg); };
    if (!(E > 0.0) || !std::isfinite(E)) fail("E must be positive");
    if (!(nu > -1.0 && nu < 0.5)) fail("nu must lie in (-1, 0.5)");
    if (!(Yc > 0.0) || !std::isfinite(Yc)) fail("Yc must be positive");
    if (!(l > 0.0) || !std::isfinite(l)) fail("l must be positive");
    if (!(eta >= 0.0 && eta <= 1.0 / 3.0)) fail("eta must lie in [0, 1/3] for g to be convex");
    if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must lie in [0, 1]");
    if (!(k_res >= 0.0 && k_res < 1e-2)) fail("k_res must lie in [0, 1e-2)");
}

std::array<double, 2> Strain2D::eigenvalues() const {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return {m - r, m + r};
}

std::array<double, 2> Strain2D::principal_direction() const {
    const double theta_max = 0.5 * std::atan2(2.0 * xy, xx - yy);
    return {-std::sin(theta_max), std::cos(theta_max)};
}

Strain2D Strain2D::rotated(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    Strain2D r;
    r.xx = c * c * xx - 2.0 * c * s * xy + s * s * yy;
    r.yy = s * s * xx + 2.0 * c * s * xy + c * c * yy;
    r.xy = c * s * (xx - yy) + (c * c - s * s) * xy;
    return r;
}

double softening_g(double d, double eta) {
    check_unit_interval(d, "softening_g");
    const double a = 1.0 - d;
    return a * a + eta * a * d * d * d;
}

double softening_dg(double d, double eta) {
    check_unit_interval(d, "softening_dg");
    return -2.0 * (1.0 - d) + eta * (3.0 * d * d - 4.0 * d * d * d);
}

double softening_d2g(double d, double eta) {
    check_unit_interval(d, "softening_d2g");
    return 2.0 + eta * (6.0 * d - 12.0 * d * d);
}

double dissipation_h(double d) {
    check_unit_interval(d, "dissipation_h");
    return 2.0 * d + 3.0 * d * d;
}

double dissipation_dh(double d) {
    check_unit_interval(d, "dissipation_dh");
    return 2.0 + 6.0 * d;
}

double degradation(double d, const MaterialParams& mat) {
    return (1.0 - mat.k_res) * softening_g(d, mat.eta) + mat.k_res;
}

double free_energy(const Strain2D& eps, double d, const MaterialParams& mat) {
    const auto e = eps.eigenvalues();
    const double tr = eps.trace();
    double phi = 0.5 * mat.lambda() * degradation(alpha_of(tr, mat.beta) * d, mat) * tr * tr;
    for (double ei : e) phi += mat.mu() * degradation(alpha_of(ei, mat.beta) * d, mat) * ei * ei;
    return phi;
}

PhiSplit phi_split(const Strain2D& eps, const MaterialParams& mat) {
    const auto [e1, e2] = eps.eigenvalues();
    const double mu = mat.mu();
    PhiSplit s;
    s.phi1 = 0.5 * mat.lambda() * (e1 + e2) * (e1 + e2);
    if (e1 >= 0.0) {
        s.phi1 += mu * (e1 * e1 + e2 * e2);
    } else if (e2 < 0.0) {
        s.phi0 = mu * (e1 * e1 + e2 * e2);
    } else {
        s.phi0 = mu * e1 * e1;
        s.phi1 += mu * e2 * e2;
    }
    return s;
}

Stress2D stress(const Strain2D& eps, double d, const MaterialParams& mat) {
    const auto e = eps.eigenvalues();
    const auto n1 = eps.principal_direction();
    const std::array<double, 2> n2{-n1[1], n1[0]};
    const double tr = eps.trace();
    const double p = mat.lambda() * degradation(alpha_of(tr, mat.beta) * d, mat) * tr;
    const double k1 = 2.0 * mat.mu() * degradation(alpha_of(e[0], mat.beta) * d, mat) * e[0];
    const double k2 = 2.0 * mat.mu() * degradation(alpha_of(e[1], mat.beta) * d, mat) * e[1];
    Stress2D s;
    s.xx = p + k1 * n1[0] * n1[0] + k2 * n2[0] * n2[0];
    s.yy = p + k1 * n1[1] * n1[1] + k2 * n2[1] * n2[1];
    s.xy = k1 * n1[0] * n1[1] + k2 * n2[0] * n2[1];
    return s;
}

Tangent tangent(const Strain2D& eps, double d, const MaterialParams& mat) {
    const auto e = eps.eigenvalues();
    const auto n1 = eps.principal_direction();
    const std::array<double, 2> n2{-n1[1], n1[0]};
    const double mu = mat.mu();
    const double a1 = alpha_of(e[0], mat.beta), a2 = alpha_of(e[1], mat.beta);
    const double g1 = degradation(a1 * d, mat), g2 = degradation(a2 * d, mat);
    // Shear coefficient (k'(e1) - k'(e2)) / (e1 - e2); exact limit when both
    // eigenvalues fall on the same branch.
    const double shear = a1 == a2 ? 2.0 * mu * g1 : 2.0 * mu * (g2 * e[1] - g1 * e[0]) / (e[1] - e[0]);
    const double s2 = std::sqrt(2.0);
    const Voigt m1{n1[0] * n1[0], n1[1] * n1[1], n1[0] * n1[1]};
    const Voigt m2{n2[0] * n2[0], n2[1] * n2[1], n2[0] * n2[1]};
    const Voigt nn{s2 * n1[0] * n2[0], s2 * n1[1] * n2[1], (n1[0] * n2[1] + n2[0] * n1[1]) / s2};
    Tangent D{};
    add_outer(D, 2.0 * mu * g1, m1);
    add_outer(D, 2.0 * mu * g2, m2);
    add_outer(D, shear, nn);
    add_outer(D, mat.lambda() * degradation(alpha_of(eps.trace(), mat.beta) * d, mat), Voigt{1.0, 1.0, 0.0});
    return D;
}

Tangent hooke(const MaterialParams& mat) {
    const double lam = mat.lambda(), mu = mat.mu();
    return Tangent{{{lam + 2.0 * mu, lam, 0.0}, {lam, lam + 2.0 * mu, 0.0}, {0.0, 0.0, mu}}};
}

double local_objective(const Strain2D& eps, double d, const MaterialParams& mat) {
    return free_energy(eps, d, mat) + mat.Yc * dissipation_h(d);
}

DamageObjective1D::DamageObjective1D(const Strain2D& eps, const MaterialParams& mat)
    : eta_(mat.eta), k_(mat.k_res), Yc_(mat.Yc) {
    const auto e = eps.eigenvalues();
    const double tr = eps.trace();
    auto add = [&](double coef, double alpha) {
        if (coef == 0.0) return;
        if (alpha == 0.0) {
            constant_ += coef;  // gk(0) = 1
            return;
        }
        for (int i = 0; i < count_; ++i) {
            if (terms_[i].alpha == alpha) {
                terms_[i].coef += coef;
                return;
            }
        }
        terms_[count_++] = Term{coef, alpha};
    };
    add(0.5 * mat.lambda() * tr * tr, alpha_of(tr, mat.beta));
    for (double ei : e) add(mat.mu() * ei * ei, alpha_of(ei, mat.beta));
}

double DamageObjective1D::value(double d) const {
    double v = constant_ + Yc_ * dissipation_h(d);
    for (int i = 0; i < count_; ++i)
        v += terms_[i].coef * ((1.0 - k_) * softening_g(terms_[i].alpha * d, eta_) + k_);
    return v;
}

double DamageObjective1D::derivative(double d) const {
    double v = Yc_ * dissipation_dh(d);
    for (int i = 0; i < count_; ++i)
        v += terms_[i].coef * terms_[i].alpha * (1.0 - k_) * softening_dg(terms_[i].alpha * d, eta_);
    return v;
}

double DamageObjective1D::second_derivative(double d) const {
    double v = 6.0 * Yc_;
    for (int i = 0; i < count_; ++i) {
        const double a = terms_[i].alpha;
        v += terms_[i].coef * a * a * (1.0 - k_) * softening_d2g(a * d, eta_);
    }
    return v;
}

double local_damage_update(const DamageObjective1D& f, double d_n, double tol) {
    check_unit_interval(d_n, "local_damage_update");
    if (!(tol > 0.0)) throw std::invalid_argument("local_damage_update: tol must be positive");
    if (d_n >= 1.0) return 1.0;
    if (f.derivative(d_n) >= 0.0) return d_n;
    if (f.derivative(1.0) <= 0.0) return 1.0;

    // f' is increasing with f'(lo) < 0 < f'(hi): safeguarded Newton.
    double lo = d_n, hi = 1.0;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fp = f.derivative(x);
        if (fp > 0.0)
            hi = x;
        else if (fp < 0.0)
            lo = x;
        else
            return x;
        double next = x - fp / f.second_derivative(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) < 0.1 * tol || hi - lo < tol) return std::clamp(next, lo, hi);
        x = next;
    }
    return 0.5 * (lo + hi);
}

double local_damage_update(const Strain2D& eps, double d_n, const MaterialParams& mat, double tol) {
    return local_damage_update(DamageObjective1D(eps, mat), d_n, tol);
}

double onset_strain(const MaterialParams& mat) {
    // f'(0) = -2 (1 - k) phi1 + 2 Yc with phi1 = (lambda + 2 mu) eps^2 / 2
    return std::sqrt(2.0 * mat.Yc / ((1.0 - mat.k_res) * (mat.lambda() + 2.0 * mat.mu())));
}

double saturation_strain(const MaterialParams& mat) {
    if (!(mat.eta > 0.0)) throw std::domain_error("saturation strain is unbounded for eta = 0");
    // f'(1) = -(1 - k) eta phi1 + 8 Yc
    return 4.0 * std::sqrt(mat.Yc / ((1.0 - mat.k_res) * mat.eta * (mat.lambda() + 2.0 * mat.mu())));
}

}  // namespace lipfield
