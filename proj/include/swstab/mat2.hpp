#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace swstab {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// Unit vector at angle theta.
inline Vec2 e_theta(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Reduce an angle to [0, 2*pi).
inline double wrap_two_pi(double theta) {
    double t = std::fmod(theta, 2.0 * kPi);
    if (t < 0.0) t += 2.0 * kPi;
    return t + 0.0; // clears the sign of -0.0
}

/// Reduce a direction (line) angle to [0, pi).
inline double wrap_pi(double theta) {
    double t = std::fmod(theta, kPi);
    if (t < 0.0) t += kPi;
    if (t >= kPi) t = 0.0;
    return t + 0.0;
}

/// Real 2x2 matrix, row-major.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    double max_abs() const {
        return std::max(std::max(std::fabs(a11), std::fabs(a12)),
                        std::max(std::fabs(a21), std::fabs(a22)));
    }

    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
    }
    friend Mat2 operator*(double s, const Mat2& a) {
        return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
    }
    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
                a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
    }
    friend Vec2 operator*(const Mat2& a, Vec2 v) {
        return {a.a11 * v.x + a.a12 * v.y, a.a21 * v.x + a.a22 * v.y};
    }
};

/// Tr(A)Tr(B) - Tr(AB). Bilinear companion of the determinant:
/// det(A + B) = det(A) + det(B) + mixed_det(A, B).
inline double mixed_det(const Mat2& a, const Mat2& b) {
    return a.a11 * b.a22 + b.a11 * a.a22 - a.a12 * b.a21 - b.a12 * a.a21;
}

/// Spectrum of a real 2x2 matrix.
///
/// For real kinds, eig1 >= eig2 and angle1/angle2 are the direction angles
/// of associated unit eigenvectors reduced to [0, pi) (eigen-directions are
/// lines, not vectors). For a complex pair the eigenvalues are
/// eig1 +- i*imag and the angles are meaningless (set to 0).
struct Spectrum {
    enum class Kind { RealDistinct, RealRepeated, ComplexPair };

    Kind kind = Kind::RealRepeated;
    double eig1 = 0.0;   ///< larger real eigenvalue, or common real part
    double eig2 = 0.0;   ///< smaller real eigenvalue, or common real part
    double imag = 0.0;   ///< imaginary part (> 0) for ComplexPair, else 0
    double angle1 = 0.0; ///< eigen-direction of eig1, in [0, pi)
    double angle2 = 0.0; ///< eigen-direction of eig2, in [0, pi)
    bool scalar = false; ///< A is (numerically) a multiple of the identity

    bool real() const { return kind != Kind::ComplexPair; }
};

namespace detail {

/// Angle of the null direction of (A - eta*I), using the better-conditioned row.
inline double eigvec_angle(const Mat2& A, double eta) {
    const double r1x = A.a11 - eta, r1y = A.a12;
    const double r2x = A.a21, r2y = A.a22 - eta;
    double vx, vy;
    if (std::fabs(r1x) + std::fabs(r1y) >= std::fabs(r2x) + std::fabs(r2y)) {
        vx = r1y;
        vy = -r1x;
    } else {
        vx = r2y;
        vy = -r2x;
    }
    if (vx == 0.0 && vy == 0.0) return 0.0; // scalar matrix, any direction
    return wrap_pi(std::atan2(vy, vx));
}

} // namespace detail

/// Characteristic roots via the trace/determinant discriminant.
/// m = tr/2, disc = m^2 - det; roots m +- sqrt(disc).
inline Spectrum spectrum(const Mat2& A) {
    Spectrum s;
    const double tr = A.trace();
    const double de = A.det();
    const double m = 0.5 * tr;
    const double disc = m * m - de;

    const double mag2 = std::max({m * m, std::fabs(de), 1e-300});
    s.scalar = std::max({std::fabs(A.a12), std::fabs(A.a21),
                         std::fabs(A.a11 - A.a22)}) <=
               1e-13 * std::max(A.max_abs(), 1e-300);

    if (disc > 1e-12 * mag2) {
        s.kind = Spectrum::Kind::RealDistinct;
        const double root = std::sqrt(disc);
        // Take the larger-magnitude root first, recover the other from the
        // product to avoid cancellation when det is tiny.
        const double big = (m >= 0.0) ? m + root : m - root;
        double other;
        if (big == 0.0) {
            other = 0.0;
        } else {
            other = de / big;
        }
        s.eig1 = std::max(big, other);
        s.eig2 = std::min(big, other);
        s.angle1 = detail::eigvec_angle(A, s.eig1);
        s.angle2 = detail::eigvec_angle(A, s.eig2);
    } else if (disc < -1e-12 * mag2) {
        s.kind = Spectrum::Kind::ComplexPair;
        s.eig1 = s.eig2 = m;
        s.imag = std::sqrt(-disc);
    } else {
        s.kind = Spectrum::Kind::RealRepeated;
        s.eig1 = s.eig2 = m;
        if (!s.scalar) {
            s.angle1 = s.angle2 = detail::eigvec_angle(A, m);
        }
    }
    return s;
}

/// Both eigenvalues in the open left half-plane; for 2x2 this is
/// trace < 0 and det > 0 (strict, so a zero real part fails).
inline bool is_hurwitz(const Mat2& A) { return A.trace() < 0.0 && A.det() > 0.0; }

/// (1-lam)*A0 + lam*A1.
inline Mat2 convex_combination(const Mat2& A0, const Mat2& A1, double lam) {
    if (!(lam >= 0.0 && lam <= 1.0))
        throw std::domain_error("convex_combination: lam must lie in [0,1]");
    return (1.0 - lam) * A0 + lam * A1;
}

/// Result of the hyperbolicity test for a Hurwitz pair: whether some convex
/// combination A_lam has real eigenvalues of opposite signs, decided by
///   Tr(A0)Tr(A1) - Tr(A0 A1) < -2 sqrt(det A0 det A1)
/// together with the open lambda-interval on which det(A_lam) < 0.
struct CriterionReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    bool boundary = false; ///< |lhs - rhs| within tie tolerance; holds is false
    std::optional<std::pair<double, double>> lambda_window;
};

namespace detail {

inline void require_hurwitz(const Mat2& A, const char* name) {
    if (!is_hurwitz(A))
        throw std::domain_error(std::string(name) + " not Hurwitz");
}

} // namespace detail

/// Decide the hyperbolicity criterion for a pair of Hurwitz matrices.
///
/// The lambda window solves the quadratic det(A_lam) = 0 exactly:
/// det(A0 + lam*D) = det(A0) + lam*mixed_det(A0,D) + lam^2*det(D), D = A1-A0.
/// Ties (|lhs-rhs| within 1e-12 relative) report holds = false with the
/// boundary flag set; the condition is strict.
inline CriterionReport hyperbolicity_criterion(const Mat2& A0, const Mat2& A1) {
    detail::require_hurwitz(A0, "A0");
    detail::require_hurwitz(A1, "A1");

    CriterionReport r;
    r.lhs = A0.trace() * A1.trace() - (A0 * A1).trace();
    r.rhs = -2.0 * std::sqrt(A0.det() * A1.det());
    const double tie = 1e-12 * std::max({1.0, std::fabs(r.lhs), std::fabs(r.rhs)});
    r.boundary = std::fabs(r.lhs - r.rhs) <= tie;
    r.holds = !r.boundary && r.lhs < r.rhs;

    if (r.holds) {
        const Mat2 D = A1 - A0;
        const double c0 = A0.det();
        const double c1 = mixed_det(A0, D);
        const double c2 = D.det();
        // holds implies an interior negative dip, hence c2 > 0 and two
        // real roots strictly inside (0,1) (det is positive at both ends).
        const double disc = c1 * c1 - 4.0 * c0 * c2;
        if (c2 > 0.0 && disc > 0.0) {
            const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
            double r1 = q / c2;
            double r2 = c0 / q;
            if (r1 > r2) std::swap(r1, r2);
            if (r1 > 0.0 && r2 < 1.0) r.lambda_window = std::make_pair(r1, r2);
        }
    }
    return r;
}

/// Brute-force oracle for the lambda window: sign scan of det(A_lam) on a
/// uniform grid, a golden-section dip around the sampled minimum (windows
/// narrower than the grid step), then bisection of each edge.
inline std::optional<std::pair<double, double>>
lambda_window_scan(const Mat2& A0, const Mat2& A1, int grid_size) {
    detail::require_hurwitz(A0, "A0");
    detail::require_hurwitz(A1, "A1");
    if (grid_size < 2) throw std::domain_error("lambda_window_scan: grid_size must be >= 2");

    const auto f = [&](double lam) { return convex_combination(A0, A1, lam).det(); };

    // Locate some lambda with det < 0.
    double neg = -1.0;
    double min_lam = 0.0, min_val = f(0.0);
    for (int k = 0; k <= grid_size; ++k) {
        const double lam = static_cast<double>(k) / grid_size;
        const double v = f(lam);
        if (v < min_val) {
            min_val = v;
            min_lam = lam;
        }
        if (v < 0.0) {
            neg = lam;
            break;
        }
    }
    if (neg < 0.0) {
        // Refine around the sampled minimum in case the dip is sub-grid.
        double lo = std::max(0.0, min_lam - 1.0 / grid_size);
        double hi = std::min(1.0, min_lam + 1.0 / grid_size);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            if (f1 < f2) {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - gr * (hi - lo); f1 = f(x1);
            } else {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + gr * (hi - lo); f2 = f(x2);
            }
            if (std::min(f1, f2) < 0.0) break;
        }
        if (f1 < 0.0) neg = x1;
        else if (f2 < 0.0) neg = x2;
        else return std::nullopt;
    }

    // Bisect both edges from the interior negative point.
    const auto bisect = [&](double a, double b) {
        // f(a) < 0 <= f(b); a may lie on either side of b.
        double fa = f(a);
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = f(m);
            if ((fa < 0.0) == (fm < 0.0)) {
                a = m; fa = fm;
            } else {
                b = m;
            }
            if (std::fabs(b - a) <= 1e-14) break;
        }
        return 0.5 * (a + b);
    };
    const double lo_edge = bisect(neg, 0.0);
    const double hi_edge = bisect(neg, 1.0);
    return std::make_pair(std::min(lo_edge, hi_edge), std::max(lo_edge, hi_edge));
}

/// Closed-form exp(t*A).
///
/// With m = tr/2 and disc = m^2 - det, exp(tA) = e^{mt}(C*I + S*(A - mI)),
/// where C = cosh(x), S = sinh(x)/x * t for x = sqrt(disc)*t when disc > 0,
/// the trigonometric pair when disc < 0, and the shared power series in the
/// signed quantity q = disc*t^2 when |q| is small (repeated eigenvalues and
/// the cancellation-prone neighborhood |x| < 1e-4).
inline Mat2 expm(const Mat2& A, double t) {
    if (!std::isfinite(t)) throw std::domain_error("expm: t must be finite");
    const double m = 0.5 * A.trace();
    const double disc = m * m - A.det();
    const double q = disc * t * t;

    double C, S;
    if (std::fabs(q) < 1e-8) {
        C = 1.0 + q / 2.0 + q * q / 24.0 + q * q * q / 720.0;
        S = t * (1.0 + q / 6.0 + q * q / 120.0 + q * q * q / 5040.0);
    } else if (disc > 0.0) {
        const double d = std::sqrt(disc);
        C = std::cosh(d * t);
        S = std::sinh(d * t) / d;
    } else {
        const double w = std::sqrt(-disc);
        C = std::cos(w * t);
        S = std::sin(w * t) / w;
    }
    const double em = std::exp(m * t);
    const Mat2 B = A - m * Mat2::identity();
    return em * (C * Mat2::identity() + S * B);
}

/// Largest eigenvalue of a symmetric 2x2 matrix.
inline double sym_eig_max(const Mat2& M) {
    const double m = 0.5 * (M.a11 + M.a22);
    const double off = 0.5 * (M.a12 + M.a21);
    const double h = 0.5 * (M.a11 - M.a22);
    return m + std::hypot(h, off);
}

/// Smallest eigenvalue of a symmetric 2x2 matrix.
inline double sym_eig_min(const Mat2& M) {
    const double m = 0.5 * (M.a11 + M.a22);
    const double off = 0.5 * (M.a12 + M.a21);
    const double h = 0.5 * (M.a11 - M.a22);
    return m - std::hypot(h, off);
}

inline bool is_spd(const Mat2& M, double sym_tol = 1e-10) {
    const double scale = std::max(M.max_abs(), 1e-300);
    if (std::fabs(M.a12 - M.a21) > sym_tol * scale) return false;
    return M.a11 > 0.0 && M.det() > 0.0;
}

/// Unique symmetric M with A^T M + M A = -Q for Hurwitz A and SPD Q.
///
/// The three unknowns (m11, m12, m22) satisfy
///   2a*m11 + 2c*m12           = -q11
///   b*m11 + (a+d)*m12 + c*m22 = -q12
///           2b*m12 + 2d*m22   = -q22
/// solved in extended precision with one step of iterative refinement so the
/// residual stays at the 1e-12 level even for weakly damped A.
inline Mat2 solve_lyapunov(const Mat2& A, const Mat2& Q) {
    if (!is_hurwitz(A)) throw std::domain_error("solve_lyapunov: A not Hurwitz");
    if (!is_spd(Q)) throw std::domain_error("solve_lyapunov: Q not symmetric positive definite");

    const long double a = A.a11, b = A.a12, c = A.a21, d = A.a22;
    long double S[3][4] = {
        {2 * a, 2 * c, 0, -static_cast<long double>(Q.a11)},
        {b, a + d, c, -static_cast<long double>(0.5 * (Q.a12 + Q.a21))},
        {0, 2 * b, 2 * d, -static_cast<long double>(Q.a22)},
    };

    const auto solve3 = [](long double M[3][4], long double x[3]) {
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::fabs(static_cast<double>(M[r][col])) >
                    std::fabs(static_cast<double>(M[piv][col])))
                    piv = r;
            if (M[piv][col] == 0.0L)
                throw std::domain_error("solve_lyapunov: singular system");
            if (piv != col)
                for (int j = 0; j < 4; ++j) std::swap(M[piv][j], M[col][j]);
            for (int r = col + 1; r < 3; ++r) {
                const long double f = M[r][col] / M[col][col];
                for (int j = col; j < 4; ++j) M[r][j] -= f * M[col][j];
            }
        }
        for (int r = 2; r >= 0; --r) {
            long double s = M[r][3];
            for (int j = r + 1; j < 3; ++j) s -= M[r][j] * x[j];
            x[r] = s / M[r][r];
        }
    };

    long double x[3];
    {
        long double W[3][4];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) W[i][j] = S[i][j];
        solve3(W, x);
    }
    // One refinement pass against the original system.
    {
        long double res[3];
        for (int i = 0; i < 3; ++i)
            res[i] = S[i][3] - (S[i][0] * x[0] + S[i][1] * x[1] + S[i][2] * x[2]);
        long double W[3][4];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) W[i][j] = S[i][j];
            W[i][3] = res[i];
        }
        long double dx[3];
        solve3(W, dx);
        for (int i = 0; i < 3; ++i) x[i] += dx[i];
    }

    const Mat2 M{static_cast<double>(x[0]), static_cast<double>(x[1]),
                 static_cast<double>(x[1]), static_cast<double>(x[2])};
    if (!(M.a11 > 0.0 && M.det() > 0.0))
        throw std::runtime_error("solve_lyapunov: solution not positive definite");
    return M;
}

} // namespace swstab
