#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "swstab/mat2.hpp"

namespace swstab {

/// Largest generalized eigenvalue of the SPD pencil (M, N): the largest root
/// of det(M - g N) = 0, which equals max_x <x,Mx>/<x,Nx>.
inline double gen_eig_max(const Mat2& M, const Mat2& N) {
    if (!is_spd(M) || !is_spd(N))
        throw std::domain_error("gen_eig_max: inputs must be symmetric positive definite");
    const double c2 = N.det();
    const double c1 = mixed_det(M, N); // det(M - gN) = det M - g*c1 + g^2*c2
    const double c0 = M.det();
    double disc = c1 * c1 - 4.0 * c0 * c2;
    if (disc < 0.0) disc = 0.0; // SPD pencil: real roots; clamp rounding
    return (c1 + std::sqrt(disc)) / (2.0 * c2);
}

/// Quadratic-norm contraction data for the pair of flows, with the certified
/// small-jump-rate threshold beta1.
///
/// Contracts:
///  - A_i^T M_i + M_i A_i <= -2 rho M_i (as quadratic forms), i = 0, 1;
///  - V_{1-i}(x) <= kappa_i V_i(x) for all x, V_i(x) = <x, M_i x>;
///  - for every beta < beta1 the jump-augmented drift of V = V_i is strictly
///    negative, hence chi(beta) < 0. beta1 = +inf when both kappas are <= 1.
struct ContractionCertificate {
    Mat2 M0, M1;
    double rho = 0.0;
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    double beta1 = 0.0;
};

/// Build the certificate from the Lyapunov solutions with Q = I:
/// M_i solves A_i^T M_i + M_i A_i = -I, rho = min_i 1/(2 max-eig(M_i)),
/// kappa_i = max-eig of M_{1-i} relative to M_i, and
/// beta1 = rho / max_i [lambda_i (kappa_i - 1)]_+ .
inline ContractionCertificate small_beta_certificate(const Mat2& A0, const Mat2& A1,
                                                     double lam) {
    if (!(lam > 0.0 && lam < 1.0))
        throw std::domain_error("small_beta_certificate: lambda must lie in (0,1)");
    ContractionCertificate cert;
    cert.M0 = solve_lyapunov(A0, Mat2::identity());
    cert.M1 = solve_lyapunov(A1, Mat2::identity());
    cert.rho = std::min(0.5 / sym_eig_max(cert.M0), 0.5 / sym_eig_max(cert.M1));
    cert.kappa0 = gen_eig_max(cert.M1, cert.M0); // V_1 <= kappa0 V_0
    cert.kappa1 = gen_eig_max(cert.M0, cert.M1); // V_0 <= kappa1 V_1
    const double growth = std::max({lam * (cert.kappa0 - 1.0),
                                    (1.0 - lam) * (cert.kappa1 - 1.0), 0.0});
    cert.beta1 = growth > 0.0 ? cert.rho / growth
                              : std::numeric_limits<double>::infinity();
    return cert;
}

/// Numerical audit of the certified drift inequality: over a uniform grid of
/// unit directions and both discrete states, the largest value of
///   (L_beta V)(x, i) / V_i(x),
/// where L_beta V(x,i) = 2 <M_i x, A_i x> + beta lambda_i (V_{1-i}(x) - V_i(x)).
/// Strictly negative whenever beta < beta1; no guarantee above beta1.
inline double certificate_drift_check(const ContractionCertificate& cert,
                                      const Mat2& A0, const Mat2& A1, double lam,
                                      double beta, int samples) {
    if (!(beta >= 0.0)) throw std::domain_error("certificate_drift_check: beta must be >= 0");
    if (samples < 1) throw std::domain_error("certificate_drift_check: samples must be >= 1");

    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
        const double theta = kPi * static_cast<double>(j) / samples;
        const Vec2 x = e_theta(theta);
        const double v0 = dot(x, cert.M0 * x);
        const double v1 = dot(x, cert.M1 * x);
        const double drift0 = 2.0 * dot(cert.M0 * x, A0 * x) + beta * lam * (v1 - v0);
        const double drift1 =
            2.0 * dot(cert.M1 * x, A1 * x) + beta * (1.0 - lam) * (v0 - v1);
        worst = std::max(worst, std::max(drift0 / v0, drift1 / v1));
    }
    return worst;
}

} // namespace swstab
