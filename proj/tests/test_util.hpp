#pragma once

// Test-only oracles and generators. The power-series matrix exponential is
// the independent reference for the closed-form expm; it must never share
// code with the implementation under test.

#include <cmath>
#include <random>

#include "swstab/mat2.hpp"

namespace swstab::testing {

/// Scaled-and-squared 30-term power series for exp(t*A), carried in long
/// double so the oracle's own rounding stays well below the 1e-12 bar.
inline Mat2 expm_series_oracle(const Mat2& A, double t) {
    long double b[4] = {static_cast<long double>(A.a11) * t,
                        static_cast<long double>(A.a12) * t,
                        static_cast<long double>(A.a21) * t,
                        static_cast<long double>(A.a22) * t};
    long double scale_norm = 0.0L;
    for (long double v : b) scale_norm = std::max(scale_norm, std::fabs(v));

    int squarings = 0;
    if (scale_norm > 0.5L) {
        squarings = static_cast<int>(std::ceil(std::log2(static_cast<double>(scale_norm) / 0.5)));
        const long double s = std::pow(2.0L, static_cast<long double>(-squarings));
        for (auto& v : b) v *= s;
    }

    // exp(B) = sum B^k / k!
    long double e[4] = {1.0L, 0.0L, 0.0L, 1.0L};
    long double term[4] = {1.0L, 0.0L, 0.0L, 1.0L};
    for (int k = 1; k <= 30; ++k) {
        const long double t11 = term[0] * b[0] + term[1] * b[2];
        const long double t12 = term[0] * b[1] + term[1] * b[3];
        const long double t21 = term[2] * b[0] + term[3] * b[2];
        const long double t22 = term[2] * b[1] + term[3] * b[3];
        term[0] = t11 / k;
        term[1] = t12 / k;
        term[2] = t21 / k;
        term[3] = t22 / k;
        for (int j = 0; j < 4; ++j) e[j] += term[j];
    }
    for (int s = 0; s < squarings; ++s) {
        const long double e11 = e[0] * e[0] + e[1] * e[2];
        const long double e12 = e[0] * e[1] + e[1] * e[3];
        const long double e21 = e[2] * e[0] + e[3] * e[2];
        const long double e22 = e[2] * e[1] + e[3] * e[3];
        e[0] = e11;
        e[1] = e12;
        e[2] = e21;
        e[3] = e22;
    }
    return {static_cast<double>(e[0]), static_cast<double>(e[1]),
            static_cast<double>(e[2]), static_cast<double>(e[3])};
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
    return (a - b).max_abs();
}

inline Mat2 random_mat(std::mt19937_64& rng, double range = 3.0) {
    std::uniform_real_distribution<double> u(-range, range);
    return {u(rng), u(rng), u(rng), u(rng)};
}

inline Mat2 random_hurwitz(std::mt19937_64& rng, double range = 3.0) {
    for (;;) {
        const Mat2 A = random_mat(rng, range);
        if (is_hurwitz(A)) return A;
    }
}

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Mat2 random_spd(std::mt19937_64& rng, double lo = 0.3, double hi = 3.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double phi = u(rng) * kPi;
    const double c = std::cos(phi), s = std::sin(phi);
    const double d1 = lo + (hi - lo) * u(rng);
    const double d2 = lo + (hi - lo) * u(rng);
    // R diag(d1,d2) R^T
    return {c * c * d1 + s * s * d2, c * s * (d1 - d2),
            c * s * (d1 - d2), s * s * d1 + c * c * d2};
}

// The two worked families, as plain matrices.
inline Mat2 jordan_a0(double b) { return {-1.0, 2.0 * b, 0.0, -1.0}; }
inline Mat2 jordan_a1(double b) { return {-1.0, 0.0, 2.0 * b, -1.0}; }
inline Mat2 rotations_a0(double a, double b) { return {-1.0, a * b, -a / b, -1.0}; }
inline Mat2 rotations_a1(double a, double b) { return {-1.0, -a / b, a * b, -1.0}; }

} // namespace swstab::testing
