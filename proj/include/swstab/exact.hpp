#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swstab/mat2.hpp"
#include "swstab/quadrature.hpp"

namespace swstab {

/// The exact chi(beta) never crosses zero for these parameters.
struct NoTransition : std::domain_error {
    using std::domain_error::domain_error;
};

/// Potential of the rotations family. Written with two-argument arctangents
/// so both terms jump together at theta = pi (mod 2pi): the difference is
/// smooth and pi-periodic, and the value at theta = +-pi/2 is the continuous
/// extension 0.
inline double rotation_potential(double theta, double a, double b) {
    const double s = std::sin(theta), c = std::cos(theta);
    return (std::atan2(b * s, c) - std::atan2(s / b, c)) / (2.0 * a);
}

/// Potential of the Jordan family on the recurrent class (0, pi/2);
/// diverges to -inf at both endpoints.
inline double jordan_potential(double theta, double b) {
    if (!(theta > 0.0 && theta < 0.5 * kPi))
        throw std::domain_error("jordan_potential: theta must lie in (0, pi/2)");
    return -1.0 / (2.0 * b * std::sin(2.0 * theta));
}

/// One of the two closed-form families (lam = 1/2 in both):
///  - rotations(a, b): complex-spiral flows, ergodic angular process on the
///    whole circle;
///  - jordan(b): defective flows, two recurrent classes; all closed-form
///    quantities refer to the class supported on (0, pi/2).
class ExactModel {
public:
    enum class Family { Rotations, Jordan };

    static ExactModel rotations(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0))
            throw std::domain_error("rotations model: a and b must be positive");
        return ExactModel(Family::Rotations, a, b);
    }
    static ExactModel jordan(double b) {
        if (!(b > 0.0)) throw std::domain_error("jordan model: b must be positive");
        return ExactModel(Family::Jordan, 0.0, b);
    }

    Family family() const { return family_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double lam() const { return 0.5; }
    const char* family_name() const {
        return family_ == Family::Rotations ? "rotations" : "jordan";
    }

    Mat2 A0() const {
        if (family_ == Family::Rotations) return {-1.0, a_ * b_, -a_ / b_, -1.0};
        return {-1.0, 2.0 * b_, 0.0, -1.0};
    }
    Mat2 A1() const {
        if (family_ == Family::Rotations) return {-1.0, -a_ / b_, a_ * b_, -1.0};
        return {-1.0, 0.0, 2.0 * b_, -1.0};
    }

    /// Angular drift of flow i, closed form.
    double drift(double theta, int i) const {
        const double s = std::sin(theta), c = std::cos(theta);
        if (family_ == Family::Rotations) {
            return i == 0 ? -(a_ / b_) * c * c - a_ * b_ * s * s
                          : a_ * b_ * c * c + (a_ / b_) * s * s;
        }
        return i == 0 ? -2.0 * b_ * s * s : 2.0 * b_ * c * c;
    }

    /// Radial growth rate; identical for both flows in these families.
    double radial(double theta) const {
        const double amp = family_ == Family::Rotations
                               ? a_ * (b_ * b_ - 1.0) / (2.0 * b_)
                               : b_;
        return amp * std::sin(2.0 * theta) - 1.0;
    }

    double potential(double theta) const {
        return family_ == Family::Rotations ? rotation_potential(theta, a_, b_)
                                            : jordan_potential(theta, b_);
    }

    /// Angle where the potential peaks: pi/4 for b >= 1, 3*pi/4 for b < 1
    /// (v(theta + pi/2) = -v(theta) for the rotations family).
    double potential_peak() const {
        if (family_ == Family::Jordan) return 0.25 * kPi;
        return b_ >= 1.0 ? 0.25 * kPi : 0.75 * kPi;
    }

    /// Maximum of the potential over the support (attained at the peak).
    double potential_max() const {
        return family_ == Family::Rotations
                   ? std::fabs(std::atan(b_) - std::atan(1.0 / b_)) / (2.0 * a_)
                   : -1.0 / (2.0 * b_);
    }

    /// Second derivative of the potential at its peak (nonpositive).
    double potential_peak_curvature() const {
        if (family_ == Family::Jordan) return -2.0 / b_;
        const double peak = potential_peak();
        const double d0 = drift(peak, 0);
        const double d1 = drift(peak, 1);
        // d_i'(theta) = a (1/b - b) sin(2 theta) for both flows
        const double dp = a_ * (1.0 / b_ - b_) * std::sin(2.0 * peak);
        return 0.5 * (dp / (d0 * d0) + dp / (d1 * d1));
    }

    std::pair<double, double> support() const {
        return family_ == Family::Rotations ? std::make_pair(0.0, 2.0 * kPi)
                                            : std::make_pair(0.0, 0.5 * kPi);
    }

    /// chi(0) and lim_{beta->inf} chi(beta). The large-beta measure
    /// concentrates at the potential's peak, so the limit is the radial rate
    /// there: a|b^2-1|/(2b) - 1 for rotations (the family is invariant under
    /// b <-> 1/b up to an orthogonal change of basis), b - 1 for jordan.
    double chi_at_zero() const { return -1.0; }
    double chi_at_infinity() const {
        return family_ == Family::Rotations
                   ? a_ * std::fabs(b_ * b_ - 1.0) / (2.0 * b_) - 1.0
                   : b_ - 1.0;
    }

    /// Whether chi changes sign for some beta: chi is monotone from -1 to
    /// chi_at_infinity, so a transition exists iff the limit is positive.
    bool admits_transition() const { return chi_at_infinity() > 0.0; }

    /// Unnormalized scaled weight of state i at theta:
    /// (1 / |d_i(theta)|) * exp(beta * (v(theta) - v_max)).
    /// Vanishes by continuous extension outside the open support.
    double scaled_weight(double theta, int i, double beta) const {
        if (family_ == Family::Rotations) {
            const double ev = std::exp(beta * (rotation_potential(theta, a_, b_) -
                                               potential_max()));
            return ev / std::fabs(drift(theta, i));
        }
        const double s = std::sin(2.0 * theta);
        if (!(s > 0.0) || theta <= 0.0 || theta >= 0.5 * kPi) return 0.0;
        const double v = -1.0 / (2.0 * b_ * s);
        const double logd = i == 0
                                ? std::log(2.0 * b_) + 2.0 * std::log(std::fabs(std::sin(theta)))
                                : std::log(2.0 * b_) + 2.0 * std::log(std::fabs(std::cos(theta)));
        return std::exp(beta * (v - potential_max()) - logd);
    }

    /// Sum of the scaled weights over both states.
    double scaled_weight_total(double theta, double beta) const {
        if (family_ == Family::Rotations) {
            const double ev = std::exp(beta * (rotation_potential(theta, a_, b_) -
                                               potential_max()));
            return (1.0 / drift(theta, 1) - 1.0 / drift(theta, 0)) * ev;
        }
        const double s = std::sin(2.0 * theta);
        if (!(s > 0.0) || theta <= 0.0 || theta >= 0.5 * kPi) return 0.0;
        const double v = -1.0 / (2.0 * b_ * s);
        // 1/|d0| + 1/|d1| = 2 / (b sin^2(2 theta))
        return std::exp(beta * (v - potential_max()) + std::log(2.0 / b_) -
                        2.0 * std::log(s));
    }

    /// Weight prefactor without the exponential (used by the peak expansion).
    double weight_prefactor(double theta) const {
        if (family_ == Family::Rotations)
            return 1.0 / drift(theta, 1) - 1.0 / drift(theta, 0);
        const double s = std::sin(2.0 * theta);
        return 2.0 / (b_ * s * s);
    }

    /// Quadrature breakpoints seeding the adaptive subdivision: the potential
    /// peaks for the rotations family, logarithmically spaced boundary-layer
    /// points for the Jordan family (small beta pushes the mass toward the
    /// endpoint singularities of 1/|d_i|).
    std::vector<double> breakpoints() const {
        if (family_ == Family::Rotations) {
            std::vector<double> pts;
            for (int k = 0; k < 8; ++k) pts.push_back(k * 0.25 * kPi);
            pts.push_back(2.0 * kPi);
            return pts;
        }
        const double hi = 0.5 * kPi;
        return {0.0,       1e-6,      1e-4,      1e-2,      0.1,
                0.25 * kPi, hi - 0.1, hi - 1e-2, hi - 1e-4, hi - 1e-6, hi};
    }

    /// Breakpoints for a given beta: the base set plus points straddling each
    /// exponential peak at multiples of its Gaussian width. Without these the
    /// spike falls between quadrature nodes once the width drops below the
    /// panel resolution and the integral silently evaluates to zero.
    std::vector<double> quad_breakpoints(double beta) const {
        std::vector<double> pts = breakpoints();
        const double curv = -potential_peak_curvature();
        if (beta > 0.0 && curv > 0.0) {
            const double sigma = 1.0 / std::sqrt(beta * curv);
            if (sigma < 0.02) {
                const auto [lo, hi] = support();
                std::vector<double> peaks = {potential_peak()};
                if (family_ == Family::Rotations) peaks.push_back(potential_peak() + kPi);
                for (double peak : peaks) {
                    for (double k : {1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0}) {
                        for (double s : {-k, k}) {
                            const double p = peak + s * sigma;
                            if (p > lo && p < hi) pts.push_back(p);
                        }
                    }
                }
                std::sort(pts.begin(), pts.end());
                pts.erase(std::unique(pts.begin(), pts.end(),
                                      [](double x, double y) {
                                          return std::fabs(x - y) < 1e-15;
                                      }),
                          pts.end());
            }
        }
        return pts;
    }

private:
    ExactModel(Family f, double a, double b) : family_(f), a_(a), b_(b) {}

    Family family_;
    double a_;
    double b_;
};

namespace detail {

inline void check_beta(const ExactModel& m, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::domain_error("beta must be finite and nonnegative");
    if (m.family() == ExactModel::Family::Jordan && beta == 0.0)
        throw std::domain_error(
            "jordan model: the normalizer diverges at beta = 0; chi(0) = -1 is "
            "the analytic limit");
}

/// Integrate h(theta) * total scaled weight over the support. The absolute
/// tolerance matters whenever the integrand changes sign and the integral
/// sits near zero (the chi numerator at the critical rate): a purely
/// relative target would never be met there.
template <typename H>
double weighted_integral(const ExactModel& m, double beta, const H& h,
                         double rel_tol, double abs_tol = 1e-300) {
    const auto pts = m.quad_breakpoints(beta);
    const auto f = [&](double th) { return h(th) * m.scaled_weight_total(th, beta); };
    const auto r = integrate_adaptive(f, std::span<const double>(pts.data(), pts.size()),
                                      abs_tol, rel_tol);
    return r.value;
}

/// One quadrature pass for chi(beta) at the given relative tolerance.
inline double chi_single_pass(const ExactModel& m, double beta, double rel_tol) {
    const double den = weighted_integral(m, beta, [](double) { return 1.0; }, rel_tol);
    const double num = weighted_integral(
        m, beta, [&](double th) { return m.radial(th); }, rel_tol, rel_tol * den);
    return num / den;
}

/// Gaussian peak expansion around the potential's maximum (the two peaks of
/// the rotations family are identical by pi-periodicity, so one peak
/// determines the ratio). Valid when the peak width 1/sqrt(beta |v''|) is
/// below quadrature resolution; error decays like 1/beta.
template <typename H>
double peak_ratio(const ExactModel& m, double beta, const H& h) {
    const double curv = -m.potential_peak_curvature();
    const double sigma = 1.0 / std::sqrt(beta * curv);
    const double peak = m.potential_peak();
    const auto num = [&](double u) {
        const double th = peak + sigma * u;
        return h(th) * m.weight_prefactor(th) * std::exp(-0.5 * u * u);
    };
    const auto den = [&](double u) {
        const double th = peak + sigma * u;
        return m.weight_prefactor(th) * std::exp(-0.5 * u * u);
    };
    const double pts[3] = {-10.0, 0.0, 10.0};
    const auto n = integrate_adaptive(num, std::span<const double>(pts, 3), 1e-300, 1e-12);
    const auto d = integrate_adaptive(den, std::span<const double>(pts, 3), 1e-300, 1e-12);
    return n.value / d.value;
}

inline bool use_peak_expansion(const ExactModel& m, double beta) {
    return beta * std::fabs(m.potential_peak_curvature()) > 1e10;
}

} // namespace detail

/// Evaluation of the invariant angular density on a grid.
struct DensityEvaluation {
    double beta = 0.0;
    std::vector<double> theta; ///< cell centers across the support
    std::vector<double> rho0, rho1; ///< normalized density values per state
    double c_scaled = 0.0;  ///< normalizer of the scaled weights
    double log_c_beta = 0.0; ///< log of the unscaled normalizer C(beta)
    double c_beta = 0.0;     ///< exp(log_c_beta); +inf/0 when out of range
    double support_lo = 0.0, support_hi = 0.0;
};

/// Normalizer of the scaled weights (adaptive quadrature over the support).
inline double scaled_normalizer(const ExactModel& m, double beta,
                                double rel_tol = 1e-11) {
    return detail::weighted_integral(m, beta, [](double) { return 1.0; }, rel_tol);
}

/// Invariant density of the angular process for this model, normalized so the
/// two states together carry mass one.
inline DensityEvaluation density(const ExactModel& m, double beta, int grid_n = 512) {
    detail::check_beta(m, beta);
    if (grid_n < 2) throw std::domain_error("density: grid_n must be >= 2");

    DensityEvaluation out;
    out.beta = beta;
    std::tie(out.support_lo, out.support_hi) = m.support();
    out.c_scaled = scaled_normalizer(m, beta);
    out.log_c_beta = std::log(out.c_scaled) + beta * m.potential_max();
    out.c_beta = std::exp(out.log_c_beta);

    out.theta.reserve(static_cast<std::size_t>(grid_n));
    const double width = (out.support_hi - out.support_lo) / grid_n;
    for (int j = 0; j < grid_n; ++j) {
        const double th = out.support_lo + (j + 0.5) * width;
        out.theta.push_back(th);
        out.rho0.push_back(m.scaled_weight(th, 0, beta) / out.c_scaled);
        out.rho1.push_back(m.scaled_weight(th, 1, beta) / out.c_scaled);
    }
    return out;
}

/// chi(beta) with its refinement-based error estimate.
struct ChiEvaluation {
    double value = 0.0;
    double error_estimate = 0.0;
    bool peak_expansion = false; ///< evaluated by the large-beta peak expansion
};

inline ChiEvaluation chi_exact_info(const ExactModel& m, double beta) {
    detail::check_beta(m, beta);
    ChiEvaluation out;

    if (detail::use_peak_expansion(m, beta)) {
        out.peak_expansion = true;
        out.value = detail::peak_ratio(m, beta, [&](double th) { return m.radial(th); });
        out.error_estimate = 10.0 / beta;
        return out;
    }

    double coarse = detail::chi_single_pass(m, beta, 1e-9);
    double fine = detail::chi_single_pass(m, beta, 1e-11);
    double err = std::fabs(fine - coarse);
    if (err > 1e-9) {
        coarse = fine;
        fine = detail::chi_single_pass(m, beta, 1e-13);
        err = std::fabs(fine - coarse);
    }
    out.value = fine;
    out.error_estimate = err;
    return out;
}

/// chi(beta) = integral of the radial rate against the invariant angular
/// measure, by adaptive quadrature refined until the estimate is stable.
inline double chi_exact(const ExactModel& m, double beta) {
    return chi_exact_info(m, beta).value;
}

struct ChiLimits {
    double at_zero = -1.0;
    double at_infinity = 0.0;
    /// chi(0) is reported as the analytic limit rather than a quadrature value
    /// (the Jordan normalizer diverges at beta = 0).
    bool zero_is_analytic_limit = false;
};

inline ChiLimits chi_limits(const ExactModel& m) {
    ChiLimits l;
    l.at_zero = m.chi_at_zero();
    l.at_infinity = m.chi_at_infinity();
    l.zero_is_analytic_limit = m.family() == ExactModel::Family::Jordan;
    return l;
}

/// The critical jump rate: the unique zero of chi. Exists iff the
/// large-beta limit of chi is positive (chi is monotone from chi(0) = -1).
inline double beta_c(const ExactModel& m, double tol = 1e-10) {
    if (!m.admits_transition()) {
        if (m.family() == ExactModel::Family::Rotations)
            throw NoTransition("no transition: a*|b - 1/b| <= 2, so lim chi <= 0");
        throw NoTransition("no transition: b <= 1, so lim chi <= 0");
    }
    // single-pass evaluations at 1e-11 are an order below the root tolerance
    const auto f = [&](double beta) { return detail::chi_single_pass(m, beta, 1e-11); };
    return bracket_and_bisect(f, 0.0, -1.0, 1.0, tol);
}

struct CovarianceSign {
    double covariance = 0.0;
    int sign = 0;
};

/// Sign of d(chi)/d(beta), computed as the covariance of the radial rate and
/// the potential under the normalized angular measure.
inline CovarianceSign chi_derivative_sign(const ExactModel& m, double beta) {
    detail::check_beta(m, beta);
    const double den = scaled_normalizer(m, beta);
    const auto mean = [&](auto&& h) {
        return detail::weighted_integral(m, beta, h, 1e-12, 1e-12 * den) / den;
    };
    const double ea = mean([&](double th) { return m.radial(th); });
    const double ev = mean([&](double th) { return m.potential(th); });
    const double eav = mean([&](double th) { return m.radial(th) * m.potential(th); });
    CovarianceSign out;
    out.covariance = eav - ea * ev;
    const double scale = (1.0 + std::fabs(ea)) * (1.0 + std::fabs(ev));
    if (std::fabs(out.covariance) <= 1e-9 * scale)
        out.sign = 0;
    else
        out.sign = out.covariance > 0.0 ? 1 : -1;
    return out;
}

/// Test function on the circle times {0,1} together with an optional
/// analytic theta-derivative; a fourth-order central difference is used
/// when the derivative is not supplied.
struct TestFunction {
    std::function<double(double, int)> f;
    std::function<double(double, int)> df; ///< may be empty
};

/// Integral of the generator applied to f against the invariant measure;
/// zero (up to quadrature error) exactly when the density is stationary.
inline double stationarity_residual(const ExactModel& m, double beta,
                                    const TestFunction& tf) {
    detail::check_beta(m, beta);
    if (!tf.f) throw std::invalid_argument("stationarity_residual: missing test function");

    const auto dtheta = [&](double th, int i) {
        if (tf.df) return tf.df(th, i);
        const double h = 1e-4;
        return (8.0 * (tf.f(th + h, i) - tf.f(th - h, i)) -
                (tf.f(th + 2.0 * h, i) - tf.f(th - 2.0 * h, i))) /
               (12.0 * h);
    };

    const double den = scaled_normalizer(m, beta);
    const auto pts = m.quad_breakpoints(beta);
    double total = 0.0;
    for (int i = 0; i < 2; ++i) {
        const auto integrand = [&](double th) {
            const double gen = m.drift(th, i) * dtheta(th, i) +
                               0.5 * beta * (tf.f(th, 1 - i) - tf.f(th, i));
            return gen * m.scaled_weight(th, i, beta);
        };
        // the integral itself is ~0 for stationary densities, so the
        // stopping rule must be absolute, scaled by the measure's mass
        total += integrate_adaptive(integrand,
                                    std::span<const double>(pts.data(), pts.size()),
                                    1e-11 * den, 1e-11)
                     .value;
    }
    return total / den;
}

/// Exact per-(bin, state) masses of the invariant measure folded to [0, pi),
/// matching the occupation histogram's binning.
inline std::pair<std::vector<double>, std::vector<double>>
exact_bin_masses(const ExactModel& m, double beta, int bins) {
    detail::check_beta(m, beta);
    if (bins < 2) throw std::domain_error("exact_bin_masses: bins must be >= 2");

    const double c = scaled_normalizer(m, beta);
    std::vector<double> m0(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> m1(static_cast<std::size_t>(bins), 0.0);
    const auto [lo, hi] = m.support();
    const bool folded_double = m.family() == ExactModel::Family::Rotations;

    const auto all_pts = m.quad_breakpoints(beta);
    for (int bin = 0; bin < bins; ++bin) {
        const double a = bin * kPi / bins;
        const double b = (bin + 1) * kPi / bins;
        const double clip_a = std::max(a, lo);
        const double clip_b = folded_double ? b : std::min(b, hi);
        if (!(clip_a < clip_b)) continue;
        std::vector<double> pts = {clip_a, clip_b};
        for (double p : all_pts)
            if (p > clip_a && p < clip_b) pts.push_back(p);
        std::sort(pts.begin(), pts.end());
        for (int i = 0; i < 2; ++i) {
            const auto f = [&](double th) { return m.scaled_weight(th, i, beta); };
            double v = integrate_adaptive(f, std::span<const double>(pts.data(), pts.size()),
                                          1e-14, 1e-9)
                           .value;
            if (folded_double) v *= 2.0; // the [pi, 2pi) copy folds onto this bin
            (i == 0 ? m0 : m1)[static_cast<std::size_t>(bin)] = v / c;
        }
    }
    return {std::move(m0), std::move(m1)};
}

} // namespace swstab
