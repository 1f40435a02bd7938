#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swstab/mat2.hpp"

namespace swstab {

/// det(A_lam) >= 0: the averaged matrix has no real eigenvalues of opposite
/// signs, so there is no stable/unstable splitting of directions.
struct NoHyperbolicSplit : std::domain_error {
    using std::domain_error::domain_error;
};

/// A configuration the case table cannot label, or drift values so close to
/// zero at the averaged critical angles that signs are meaningless.
struct NumericalDegeneracy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rotation speed of the direction e_theta under the flow of A:
/// <A e_theta, e_{theta+pi/2}>. Pi-periodic; vanishes exactly at
/// eigen-directions of A.
inline double angular_drift(const Mat2& A, double theta) {
    const double s = std::sin(theta), c = std::cos(theta);
    return (A.a22 - A.a11) * s * c + A.a21 * c * c - A.a12 * s * s;
}

/// Instantaneous growth rate of log|x| in direction theta:
/// <A e_theta, e_theta>. Pi-periodic.
inline double radial_rate(const Mat2& A, double theta) {
    const double s = std::sin(theta), c = std::cos(theta);
    return A.a11 * c * c + (A.a12 + A.a21) * s * c + A.a22 * s * s;
}

/// Zeros of the angular drift on a half period [0, pi).
struct CircleZeros {
    struct Zero {
        double angle = 0.0;   ///< in [0, pi)
        bool touching = false; ///< even multiplicity: drift does not change sign
    };
    std::vector<Zero> zeros;
    bool is_identically_zero = false;
};

/// Zeros of theta -> angular_drift(A, theta), obtained from the
/// eigen-directions of A (exact algebra). Sampling on both sides of each
/// zero only tags it sign-changing or touching; touching zeros would be
/// invisible to a sign-change search, which is why root-finding on the drift
/// is not used. Count per half period matches the spectrum: complex pair ->
/// none, repeated defective -> one touching, real distinct -> two
/// sign-changing.
inline CircleZeros circle_zeros(const Mat2& A, double tol = 1e-10) {
    CircleZeros out;
    const Spectrum s = spectrum(A);
    if (s.scalar) {
        out.is_identically_zero = true;
        return out;
    }
    if (s.kind == Spectrum::Kind::ComplexPair) return out;

    std::vector<double> angles;
    angles.push_back(s.angle1);
    if (s.kind == Spectrum::Kind::RealDistinct) angles.push_back(s.angle2);

    const double h = 1e-4;
    for (double ang : angles) {
        const double v = angular_drift(A, ang);
        if (std::fabs(v) > tol)
            throw NumericalDegeneracy("circle_zeros: eigen-direction is not a drift zero");
        const double left = angular_drift(A, ang - h);
        const double right = angular_drift(A, ang + h);
        CircleZeros::Zero z;
        z.angle = ang;
        z.touching = (left < 0.0) == (right < 0.0);
        out.zeros.push_back(z);
    }
    if (out.zeros.size() == 2 && out.zeros[0].angle > out.zeros[1].angle)
        std::swap(out.zeros[0], out.zeros[1]);
    return out;
}

/// Hyperbolic structure of the averaged matrix A_lam: the stable and
/// unstable direction angles and the eigenvalue magnitudes
/// lambda_plus > 0 > -lambda_minus.
struct AveragedProfile {
    double theta_minus = 0.0; ///< stable direction, in [0, pi)
    double theta_plus = 0.0;  ///< unstable direction, in [0, pi)
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double lam = 0.0;

    /// Representative of theta_plus inside (theta_minus, theta_minus + pi).
    double theta_plus_lifted() const {
        return theta_plus > theta_minus ? theta_plus : theta_plus + kPi;
    }
};

/// Eigen-structure of A_lam = (1-lam)A0 + lam*A1. The averaged drift
/// d_lam is positive on (theta_minus, theta_plus) and negative on
/// (theta_plus, theta_minus + pi): directions are attracted to the unstable
/// eigen-line of the averaged flow.
inline AveragedProfile averaged_profile(const Mat2& A0, const Mat2& A1, double lam) {
    const Mat2 Alam = convex_combination(A0, A1, lam);
    const Spectrum s = spectrum(Alam);
    if (s.kind != Spectrum::Kind::RealDistinct || !(s.eig2 < 0.0 && s.eig1 > 0.0))
        throw NoHyperbolicSplit(
            "averaged_profile: A_lam has no real eigenvalues of opposite signs "
            "(det(A_lam) >= 0)");
    AveragedProfile p;
    p.lam = lam;
    p.lambda_plus = s.eig1;
    p.lambda_minus = -s.eig2;
    p.theta_plus = s.angle1;
    p.theta_minus = s.angle2;
    return p;
}

/// Outcome of the case classification of the two circle flows against the
/// averaged splitting.
struct CaseReport {
    enum class Label { A, B, C, D, E, F, ErgodicNoZeros };
    enum class Verdict { UniqueInvariantMeasure, TwoRecurrentClasses };

    struct ZeroRec {
        double angle = 0.0;        ///< reduced to [0, pi)
        double angle_lifted = 0.0; ///< representative in (theta_minus, theta_minus + pi]
        bool touching = false;
        int side = 0; ///< 0: in (theta_minus, theta_plus); 1: in (theta_plus, theta_minus+pi)
    };

    Label label = Label::ErgodicNoZeros;
    Verdict verdict = Verdict::UniqueInvariantMeasure;
    bool swapped = false;    ///< A0/A1 roles exchanged so drift0(theta_plus) < 0
    bool degenerate = false; ///< some zero is touching (coincident pair)
    /// Interval invariant under both flows (cases E and F), reduced mod pi.
    /// When hi > pi the interval wraps through 0.
    std::optional<std::pair<double, double>> invariant_interval;
    AveragedProfile profile;
    std::vector<ZeroRec> zeros0, zeros1; ///< after any swap

    const char* label_name() const {
        switch (label) {
            case Label::A: return "a";
            case Label::B: return "b";
            case Label::C: return "c";
            case Label::D: return "d";
            case Label::E: return "e";
            case Label::F: return "f";
            default: return "ergodic-no-zeros";
        }
    }
    const char* verdict_name() const {
        return verdict == Verdict::UniqueInvariantMeasure ? "unique-invariant-measure"
                                                          : "two-recurrent-classes";
    }
};

namespace detail {

inline double lift_into(double angle, double base) {
    double a = angle;
    while (a <= base) a += kPi;
    while (a > base + kPi) a -= kPi;
    return a;
}

inline std::optional<std::pair<double, double>> reduce_interval(double lo, double hi) {
    double lm = wrap_pi(lo);
    double hm = wrap_pi(hi);
    if (hm <= lm) hm += kPi; // wraps through 0 on the mod-pi circle
    return std::make_pair(lm, hm);
}

} // namespace detail

/// Classify the pair of circle flows into the case table.
///
/// Orientation is normalized so that drift0(theta_plus) < 0 < drift1(theta_plus),
/// exchanging the roles of A0/A1 (and lam with 1-lam) when needed; the swap is
/// recorded, never visible in the labels. Touching zeros count as coincident
/// pairs so the table applies verbatim, with the degenerate flag set.
inline CaseReport classify(const Mat2& A0, const Mat2& A1, double lam,
                           double tol = 1e-10) {
    AveragedProfile prof = averaged_profile(A0, A1, lam);

    const Mat2* B0 = &A0;
    const Mat2* B1 = &A1;
    bool swapped = false;
    if (angular_drift(A0, prof.theta_plus) > 0.0) {
        std::swap(B0, B1);
        swapped = true;
        prof.lam = 1.0 - lam;
    }

    const double base = prof.theta_minus;
    const double tp = prof.theta_plus_lifted();

    // The two flows must have definite signs at the averaged critical angles.
    for (const Mat2* M : {B0, B1}) {
        for (double ang : {prof.theta_minus, prof.theta_plus}) {
            if (std::fabs(angular_drift(*M, ang)) < tol)
                throw NumericalDegeneracy(
                    "classify: drift vanishes at an averaged critical angle");
        }
    }

    CaseReport rep;
    rep.swapped = swapped;
    rep.profile = prof;

    const auto gather = [&](const Mat2& M) {
        std::vector<CaseReport::ZeroRec> recs;
        const CircleZeros cz = circle_zeros(M, tol);
        for (const auto& z : cz.zeros) {
            CaseReport::ZeroRec r;
            r.angle = z.angle;
            r.angle_lifted = detail::lift_into(z.angle, base);
            r.touching = z.touching;
            r.side = r.angle_lifted < tp ? 0 : 1;
            recs.push_back(r);
        }
        std::sort(recs.begin(), recs.end(),
                  [](const auto& x, const auto& y) { return x.angle_lifted < y.angle_lifted; });
        return recs;
    };
    rep.zeros0 = gather(*B0);
    rep.zeros1 = gather(*B1);
    for (const auto& z : rep.zeros0) rep.degenerate = rep.degenerate || z.touching;
    for (const auto& z : rep.zeros1) rep.degenerate = rep.degenerate || z.touching;

    using Label = CaseReport::Label;
    using Verdict = CaseReport::Verdict;

    if (rep.zeros0.empty() && rep.zeros1.empty()) {
        rep.label = Label::ErgodicNoZeros;
        rep.verdict = Verdict::UniqueInvariantMeasure;
        return rep;
    }
    if (rep.zeros1.empty()) {
        rep.label = Label::A;
        rep.verdict = Verdict::UniqueInvariantMeasure;
        return rep;
    }
    if (rep.zeros0.empty()) {
        rep.label = Label::B;
        rep.verdict = Verdict::UniqueInvariantMeasure;
        return rep;
    }

    const double z0m = rep.zeros0.front().angle_lifted;
    const double z0M = rep.zeros0.back().angle_lifted;
    const double z1m = rep.zeros1.front().angle_lifted;
    const double z1M = rep.zeros1.back().angle_lifted;
    const bool straddle0 = z0m < tp && tp < z0M;
    const bool straddle1 = z1m < tp && tp < z1M;

    if (straddle0 || straddle1) {
        if (straddle0 && straddle1 && z1m < z0m && z1M < z0M) {
            rep.label = Label::F;
            rep.verdict = Verdict::TwoRecurrentClasses;
            rep.invariant_interval = detail::reduce_interval(z0m, z1M);
            return rep;
        }
        throw NumericalDegeneracy("classify: unrecognized straddling configuration");
    }
    if (z0M < tp && z1m > tp) {
        rep.label = Label::E;
        rep.verdict = Verdict::TwoRecurrentClasses;
        rep.invariant_interval = detail::reduce_interval(z0M, z1m);
        return rep;
    }
    if (z0m > tp) {
        // Both drift0 zeros sit in the right interval; they must be bracketed
        // by two distinct drift1 zeros there.
        if (z1m > tp && z1m < z0m && z0M < z1M) {
            rep.label = Label::C;
            rep.verdict = Verdict::UniqueInvariantMeasure;
            return rep;
        }
        throw NumericalDegeneracy("classify: unrecognized right-interval configuration");
    }
    if (z1M < tp) {
        if (z0m < z1m && z1M < z0M && z0M < tp) {
            rep.label = Label::D;
            rep.verdict = Verdict::UniqueInvariantMeasure;
            return rep;
        }
        throw NumericalDegeneracy("classify: unrecognized left-interval configuration");
    }
    throw NumericalDegeneracy("classify: configuration outside the case table");
}

} // namespace swstab
