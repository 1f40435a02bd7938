#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace swstab {

/// Result of an adaptive quadrature run. `error` is the accumulated
/// Gauss-Kronrod discrepancy, a conservative bound for smooth integrands.
struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evals = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod abscissae/weights on [-1,1] and the embedded 7-point
// Gauss weights (QUADPACK dqk15 constants).
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    return {a, b, kron, std::fabs(kron - gauss)};
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration over the panels delimited by
/// `breakpoints` (sorted). Worst-error panels are bisected until the summed
/// error estimate meets max(abs_tol, rel_tol * |integral|) or the evaluation
/// cap is hit. Endpoints are never evaluated (the 15-point rule is open), so
/// integrands may blow up or be defined by continuous extension there.
template <typename F>
QuadResult integrate_adaptive(const F& f, std::span<const double> breakpoints,
                              double abs_tol, double rel_tol,
                              std::size_t max_evals = 2'000'000) {
    if (breakpoints.size() < 2)
        throw std::invalid_argument("integrate_adaptive: need at least 2 breakpoints");

    std::priority_queue<detail::Panel> heap;
    double total = 0.0, err = 0.0;
    std::size_t evals = 0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("integrate_adaptive: breakpoints must increase");
        auto p = detail::gk15(f, breakpoints[i], breakpoints[i + 1]);
        evals += 15;
        total += p.value;
        err += p.error;
        heap.push(p);
    }

    while (err > std::max(abs_tol, rel_tol * std::fabs(total)) && evals < max_evals) {
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            // Interval at floating-point resolution; accept as is.
            total += 0.0;
            err -= worst.error;
            continue;
        }
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        evals += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    QuadResult r;
    r.value = total;
    r.error = err;
    r.evals = evals;
    r.converged = err <= std::max(abs_tol, rel_tol * std::fabs(total));
    return r;
}

template <typename F>
QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                              double rel_tol, std::size_t max_evals = 2'000'000) {
    const double pts[2] = {a, b};
    return integrate_adaptive(f, std::span<const double>(pts, 2), abs_tol, rel_tol,
                              max_evals);
}

/// Expanding bracket followed by bisection for a continuous function known to
/// cross zero exactly once on (lo, +inf). `f_lo` is the (possibly analytic)
/// value at lo. Stops when |f(mid)| <= f_tol or the bracket is at relative
/// width 1e-13.
template <typename F>
double bracket_and_bisect(const F& f, double lo, double f_lo, double hi0,
                          double f_tol, double hi_cap = 1e12) {
    if (f_lo >= 0.0)
        throw std::domain_error("bracket_and_bisect: f(lo) must be negative");
    double hi = hi0;
    double f_hi = f(hi);
    while (f_hi <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > hi_cap)
            throw std::runtime_error("bracket_and_bisect: no sign change before cap");
        f_hi = f(hi);
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::fabs(fm) <= f_tol || (hi - lo) <= 1e-13 * hi) break;
        if (fm < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return mid;
}

} // namespace swstab
