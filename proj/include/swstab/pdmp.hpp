#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "swstab/angular.hpp"
#include "swstab/mat2.hpp"
#include "swstab/rng.hpp"

namespace swstab {

/// The full model: two Hurwitz flows, the mixing weight lam in (0,1) and the
/// jump-rate scale beta. The discrete component leaves state i at rate
/// beta * lambda_i with lambda_0 = lam, lambda_1 = 1 - lam.
struct SwitchedSystem {
    Mat2 A0, A1;
    double lam = 0.5;
    double beta = 1.0;

    const Mat2& A(int i) const { return i == 0 ? A0 : A1; }
    double lambda_i(int i) const { return i == 0 ? lam : 1.0 - lam; }
    double rate(int i) const { return beta * lambda_i(i); }

    void validate() const {
        detail::require_hurwitz(A0, "A0");
        detail::require_hurwitz(A1, "A1");
        if (!(lam > 0.0 && lam < 1.0))
            throw std::domain_error("SwitchedSystem: lambda must lie in (0,1)");
        if (!(beta > 0.0)) throw std::domain_error("SwitchedSystem: beta must be positive");
    }
};

/// Polar state of the process: log-radius, direction angle in [0, 2*pi),
/// discrete state and elapsed time. The Cartesian point is never stored;
/// all radius bookkeeping happens in the log domain.
struct TrajectoryState {
    double log_r = 0.0;
    double theta = 0.0;
    int i = 0;
    double t = 0.0;
};

/// Effect of flowing e_theta along exp(t*A): the new direction angle and the
/// exact log of the radial gain log|exp(tA) e_theta|.
struct FlowStep {
    double theta = 0.0;
    double log_gain = 0.0;
};

/// Exact flow of a direction for time t >= 0, with the radial gain kept in
/// the log domain. For real splitting the dominant factor e^{(m+delta)t} is
/// pulled out analytically so the computation never overflows, no matter how
/// long the holding time.
inline FlowStep flow_direction(const Mat2& A, double t, double theta) {
    const double m = 0.5 * A.trace();
    const Mat2 B = A - m * Mat2::identity();
    if (B.max_abs() == 0.0) return {theta, m * t}; // scalar flow: pure radius

    const double disc = m * m - A.det();
    const double q = disc * t * t;
    const Vec2 u = e_theta(theta);
    const Vec2 Bu = B * u;

    double lead = m * t;
    Vec2 w;
    if (std::fabs(q) < 1e-8) {
        const double C = 1.0 + q / 2.0 + q * q / 24.0 + q * q * q / 720.0;
        const double S = t * (1.0 + q / 6.0 + q * q / 120.0 + q * q * q / 5040.0);
        w = C * u + S * Bu;
    } else if (disc < 0.0) {
        const double omega = std::sqrt(-disc);
        w = std::cos(omega * t) * u + (std::sin(omega * t) / omega) * Bu;
    } else {
        const double d = std::sqrt(disc);
        const double ex = std::exp(-2.0 * d * t);
        lead = (m + d) * t;
        w = (0.5 * (1.0 + ex)) * u + ((1.0 - ex) / (2.0 * d)) * Bu;
    }
    const double n = norm(w);
    if (n == 0.0) {
        // Start exactly on the stable eigen-direction: the direction is fixed
        // and the radius contracts at the slow eigenvalue.
        const double d = std::sqrt(std::max(disc, 0.0));
        return {theta, (m - d) * t};
    }
    return {wrap_two_pi(std::atan2(w.y, w.x)), lead + std::log(n)};
}

/// One jump cycle: exponential holding time in the current state, exact flow
/// of the polar state along it, then the discrete flip.
inline TrajectoryState step(const TrajectoryState& state, const SwitchedSystem& sys,
                            RngStream& rng) {
    const double hold = rng.exponential(sys.rate(state.i));
    const FlowStep f = flow_direction(sys.A(state.i), hold, state.theta);
    TrajectoryState next;
    next.log_r = state.log_r + f.log_gain;
    next.theta = f.theta;
    next.i = 1 - state.i;
    next.t = state.t + hold;
    return next;
}

/// One recorded jump of a simulated path.
struct JumpRecord {
    double hold = 0.0;         ///< holding time spent in state_before
    int state_before = 0;
    double theta_before = 0.0; ///< direction at the start of the holding interval
    double log_r_after = 0.0;  ///< log|X| relative to |X_0| after the flow
    double t_after = 0.0;
};

/// Simulate exactly n_jumps jump cycles and record each one.
inline std::pair<std::vector<JumpRecord>, TrajectoryState>
simulate_jumps(const SwitchedSystem& sys, double theta0, int i0,
               std::int64_t n_jumps, std::uint64_t seed) {
    sys.validate();
    if (n_jumps < 1) throw std::domain_error("simulate_jumps: need at least one jump");
    RngStream rng(seed, 0);
    TrajectoryState st{0.0, wrap_two_pi(theta0), i0, 0.0};
    std::vector<JumpRecord> recs;
    recs.reserve(static_cast<std::size_t>(n_jumps));
    for (std::int64_t k = 0; k < n_jumps; ++k) {
        JumpRecord r;
        r.state_before = st.i;
        r.theta_before = st.theta;
        const TrajectoryState next = step(st, sys, rng);
        r.hold = next.t - st.t;
        r.log_r_after = next.log_r;
        r.t_after = next.t;
        recs.push_back(r);
        st = next;
    }
    return {std::move(recs), st};
}

/// Monte Carlo estimate of the Lyapunov exponent.
struct LyapunovEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double horizon = 0.0;
    int replicas = 0;
    std::uint64_t seed = 0;
    bool single_replica = false; ///< std_error is not estimable from one replica
};

/// Mean and standard error across independent replica values.
inline LyapunovEstimate replicate_ci(std::span<const double> values, double horizon,
                                     std::uint64_t seed) {
    if (values.empty()) throw std::domain_error("replicate_ci: no replicas");
    LyapunovEstimate est;
    est.horizon = horizon;
    est.replicas = static_cast<int>(values.size());
    est.seed = seed;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    est.value = mean;
    if (values.size() < 2) {
        est.std_error = 0.0;
        est.single_replica = true;
        return est;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    est.std_error = sd / std::sqrt(static_cast<double>(values.size()));
    return est;
}

namespace detail {

/// Run fn(r) for r in [0, replicas), fanning out over hardware threads.
/// Each replica owns its RNG stream, so the result is independent of the
/// scheduling.
template <typename Fn>
void for_each_replica(int replicas, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        std::min<unsigned>(hw, static_cast<unsigned>(replicas));
    if (workers <= 1) {
        for (int r = 0; r < replicas; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int r = static_cast<int>(w); r < replicas;
                 r += static_cast<int>(workers))
                fn(r);
        });
    }
    for (auto& th : pool) th.join();
}

inline double chi_replica(const SwitchedSystem& sys, double theta0, int i0,
                          double horizon, double burn_in, RngStream rng) {
    double t = 0.0, lr = 0.0, lr_burn = 0.0, th = wrap_two_pi(theta0);
    int i = i0;
    const double burn = std::min(burn_in, 0.5 * horizon);
    bool burn_done = burn <= 0.0;
    while (true) {
        double remaining = rng.exponential(sys.rate(i));
        if (!burn_done && t + remaining >= burn) {
            const double dt = burn - t;
            const FlowStep f = flow_direction(sys.A(i), dt, th);
            lr += f.log_gain;
            th = f.theta;
            t = burn;
            remaining -= dt;
            lr_burn = lr;
            burn_done = true;
        }
        if (t + remaining >= horizon) {
            const double dt = horizon - t;
            lr += flow_direction(sys.A(i), dt, th).log_gain;
            break;
        }
        const FlowStep f = flow_direction(sys.A(i), remaining, th);
        lr += f.log_gain;
        th = f.theta;
        t += remaining;
        i = 1 - i;
    }
    return (lr - lr_burn) / (horizon - (burn_done ? burn : 0.0));
}

} // namespace detail

/// Estimate chi(beta) = lim (1/t) log|X_t| by exact event-driven simulation:
/// per replica, exponential holding times and closed-form flows, with the
/// last holding interval truncated exactly at the horizon. The value is the
/// mean over replicas of the per-replica log-radius slope after a burn-in
/// transient is discarded.
inline LyapunovEstimate simulate_chi(const SwitchedSystem& sys, double theta0, int i0,
                                     double horizon, int replicas, std::uint64_t seed,
                                     double burn_in = 100.0) {
    sys.validate();
    if (!(horizon > 0.0)) throw std::domain_error("simulate_chi: horizon must be positive");
    if (replicas < 1) throw std::domain_error("simulate_chi: need at least one replica");
    if (i0 != 0 && i0 != 1) throw std::domain_error("simulate_chi: i0 must be 0 or 1");

    std::vector<double> values(static_cast<std::size_t>(replicas));
    detail::for_each_replica(replicas, [&](int r) {
        values[static_cast<std::size_t>(r)] = detail::chi_replica(
            sys, theta0, i0, horizon, burn_in,
            RngStream(seed, static_cast<std::uint64_t>(r)));
    });
    return replicate_ci(values, horizon, seed);
}

/// Empirical angular occupation measure, folded to [0, pi).
struct OccupationHistogram {
    int bins = 0;
    double dt_sample = 0.0;
    double horizon = 0.0;
    std::vector<double> w0, w1; ///< normalized weights per (bin, state); sums to 1
    std::int64_t samples = 0;
};

/// Sample (theta mod pi, i) every dt_sample along one exact trajectory.
/// Sub-steps inside holding intervals use the closed-form flow from the
/// interval start, so there is no integrator error anywhere. Folding to
/// [0, pi) identifies u and -u.
inline OccupationHistogram occupation_histogram(const SwitchedSystem& sys, double theta0,
                                                int i0, double horizon, int bins,
                                                double dt_sample, std::uint64_t seed,
                                                double burn_in = 0.0) {
    sys.validate();
    if (bins < 2) throw std::domain_error("occupation_histogram: bins must be >= 2");
    if (!(dt_sample > 0.0)) throw std::domain_error("occupation_histogram: dt_sample must be positive");
    if (!(horizon > dt_sample))
        throw std::domain_error("occupation_histogram: horizon too short for one sample");

    OccupationHistogram h;
    h.bins = bins;
    h.dt_sample = dt_sample;
    h.horizon = horizon;
    h.w0.assign(static_cast<std::size_t>(bins), 0.0);
    h.w1.assign(static_cast<std::size_t>(bins), 0.0);

    RngStream rng(seed, 0);
    double t0 = 0.0, th = wrap_two_pi(theta0);
    int i = i0;
    std::int64_t k = static_cast<std::int64_t>(std::floor(burn_in / dt_sample)) + 1;

    const auto record = [&](double angle) {
        const double folded = wrap_pi(angle);
        int b = static_cast<int>(folded / kPi * bins);
        if (b >= bins) b = bins - 1;
        (i == 0 ? h.w0 : h.w1)[static_cast<std::size_t>(b)] += 1.0;
        ++h.samples;
    };

    while (t0 < horizon) {
        const double hold = rng.exponential(sys.rate(i));
        const double t1 = std::min(t0 + hold, horizon);
        while (static_cast<double>(k) * dt_sample <= t1) {
            const double tau = static_cast<double>(k) * dt_sample - t0;
            record(flow_direction(sys.A(i), tau, th).theta);
            ++k;
        }
        if (t0 + hold >= horizon) break;
        th = flow_direction(sys.A(i), hold, th).theta;
        t0 += hold;
        i = 1 - i;
    }

    if (h.samples == 0)
        throw std::domain_error("occupation_histogram: no samples taken");
    const double n = static_cast<double>(h.samples);
    for (auto& w : h.w0) w /= n;
    for (auto& w : h.w1) w /= n;
    return h;
}

} // namespace swstab
