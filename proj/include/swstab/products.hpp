#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "swstab/mat2.hpp"
#include "swstab/pdmp.hpp"
#include "swstab/rng.hpp"

namespace swstab {

/// One random factor of the embedded chain: exp(S * A_i) with S exponential
/// of rate beta * lambda_i. Every such factor has spectral radius below one
/// (eigenvalue moduli e^{S Re(eig)} with Re < 0), even though its operator
/// norm may exceed one.
inline Mat2 sample_factor(const SwitchedSystem& sys, int i, RngStream& rng) {
    const double hold = rng.exponential(sys.rate(i));
    return expm(sys.A(i), hold);
}

enum class ProductVariant {
    Alternating, ///< i_0 = 0, parity flips every step (the embedded chain law)
    IidHalfSum,  ///< i drawn uniformly each step (half sum of the image laws)
};

inline const char* variant_name(ProductVariant v) {
    return v == ProductVariant::Alternating ? "alternating" : "iid-halfsum";
}

/// Per-step growth exponent of the random matrix product.
struct ProductEstimate {
    double value = 0.0;     ///< estimate of lim (1/k) log|U_k ... U_1|
    double std_error = 0.0;
    std::int64_t steps = 0;
    int replicas = 0;
    std::uint64_t seed = 0;
    ProductVariant variant = ProductVariant::Alternating;
    bool single_replica = false;
};

namespace detail {

/// Carried-vector top-exponent estimator. The factors are accumulated into a
/// running 2x2 block which is collapsed onto the carried unit vector every
/// `renorm_period` steps; exact power-of-two rescaling keeps the block inside
/// floating-point range in between, so the period does not affect the value
/// beyond rounding.
class ProductAccumulator {
public:
    ProductAccumulator(Vec2 start, std::int64_t renorm_period)
        : w_(start), period_(renorm_period) {}

    void push(const Mat2& factor) {
        block_ = factor * block_;
        const double ma = block_.max_abs();
        if (ma > 0x1.0p+500 || ma < 0x1.0p-500) {
            int e = 0;
            std::frexp(ma, &e);
            block_ = Mat2{std::ldexp(block_.a11, -e), std::ldexp(block_.a12, -e),
                          std::ldexp(block_.a21, -e), std::ldexp(block_.a22, -e)};
            bits_ += e;
        }
        if (++pending_ >= period_) flush();
    }

    void flush() {
        if (pending_ == 0) return;
        const Vec2 y = block_ * w_;
        const double n = norm(y);
        log_sum_ += std::log(n) + static_cast<double>(bits_) * std::numbers::ln2;
        w_ = (1.0 / n) * y;
        block_ = Mat2::identity();
        bits_ = 0;
        pending_ = 0;
    }

    /// Total log gain including the pending block, without mutating state.
    double log_total() const {
        if (pending_ == 0) return log_sum_;
        const Vec2 y = block_ * w_;
        return log_sum_ + std::log(norm(y)) + static_cast<double>(bits_) * std::numbers::ln2;
    }

private:
    Vec2 w_;
    Mat2 block_ = Mat2::identity();
    std::int64_t bits_ = 0;
    std::int64_t pending_ = 0;
    std::int64_t period_;
    double log_sum_ = 0.0;
};

inline double product_replica(const SwitchedSystem& sys, ProductVariant variant,
                              std::int64_t steps, RngStream rng,
                              std::int64_t renorm_period,
                              std::span<const std::int64_t> checkpoints,
                              double* running_out) {
    ProductAccumulator acc({1.0, 0.0}, renorm_period);
    std::size_t next_cp = 0;
    for (std::int64_t j = 0; j < steps; ++j) {
        const int i = variant == ProductVariant::Alternating
                          ? static_cast<int>(j & 1)
                          : (rng.coin() ? 1 : 0);
        acc.push(sample_factor(sys, i, rng));
        if (next_cp < checkpoints.size() && j + 1 == checkpoints[next_cp]) {
            running_out[next_cp] = acc.log_total() / static_cast<double>(j + 1);
            ++next_cp;
        }
    }
    acc.flush();
    return acc.log_total() / static_cast<double>(steps);
}

} // namespace detail

/// Estimate the per-step exponent of the product of random exponential-flow
/// factors, optionally recording the replica-averaged running estimate at the
/// given (sorted, 1-based) checkpoint steps.
inline ProductEstimate product_lyapunov(const SwitchedSystem& sys, ProductVariant variant,
                                        std::int64_t steps, int replicas,
                                        std::uint64_t seed,
                                        std::int64_t renorm_period = 1,
                                        std::span<const std::int64_t> checkpoints = {},
                                        std::vector<double>* mean_running = nullptr) {
    sys.validate();
    if (steps < 1) throw std::domain_error("product_lyapunov: steps must be >= 1");
    if (replicas < 1) throw std::domain_error("product_lyapunov: replicas must be >= 1");
    if (renorm_period < 1) throw std::domain_error("product_lyapunov: renorm_period must be >= 1");

    std::vector<double> values(static_cast<std::size_t>(replicas));
    std::vector<double> running(checkpoints.size() * static_cast<std::size_t>(replicas), 0.0);
    detail::for_each_replica(replicas, [&](int r) {
        values[static_cast<std::size_t>(r)] = detail::product_replica(
            sys, variant, steps, RngStream(seed, static_cast<std::uint64_t>(r)),
            renorm_period, checkpoints,
            running.data() + checkpoints.size() * static_cast<std::size_t>(r));
    });

    if (mean_running != nullptr) {
        mean_running->assign(checkpoints.size(), 0.0);
        for (int r = 0; r < replicas; ++r)
            for (std::size_t c = 0; c < checkpoints.size(); ++c)
                (*mean_running)[c] +=
                    running[checkpoints.size() * static_cast<std::size_t>(r) + c];
        for (auto& v : *mean_running) v /= static_cast<double>(replicas);
    }

    const LyapunovEstimate ci = replicate_ci(values, static_cast<double>(steps), seed);
    ProductEstimate est;
    est.value = ci.value;
    est.std_error = ci.std_error;
    est.steps = steps;
    est.replicas = replicas;
    est.seed = seed;
    est.variant = variant;
    est.single_replica = ci.single_replica;
    return est;
}

/// Cross-check of the embedded chain against the trajectory: with the same
/// holding-time draws, log|U_k ... U_1 X_0| from the accumulated matrix
/// product must reproduce the trajectory's log-radius at every jump time.
struct EmbeddedChainReport {
    double max_abs_diff = 0.0;
    double t_over_k = 0.0;          ///< T_k / k
    double expected_t_over_k = 0.0; ///< 1 / (2 lam (1-lam) beta)
    std::int64_t steps = 0;
};

inline EmbeddedChainReport embedded_chain_check(const SwitchedSystem& sys,
                                                std::int64_t k, std::uint64_t seed,
                                                double theta0 = 0.3) {
    const auto [recs, final_state] = simulate_jumps(sys, theta0, 0, k, seed);

    Mat2 P = Mat2::identity();
    std::int64_t bits = 0;
    const Vec2 x0 = e_theta(theta0);

    EmbeddedChainReport rep;
    rep.steps = k;
    for (const auto& rec : recs) {
        P = expm(sys.A(rec.state_before), rec.hold) * P;
        const double ma = P.max_abs();
        if (ma > 0x1.0p+500 || ma < 0x1.0p-500) {
            int e = 0;
            std::frexp(ma, &e);
            P = Mat2{std::ldexp(P.a11, -e), std::ldexp(P.a12, -e),
                     std::ldexp(P.a21, -e), std::ldexp(P.a22, -e)};
            bits += e;
        }
        const double log_z = std::log(norm(P * x0)) +
                             static_cast<double>(bits) * std::numbers::ln2;
        rep.max_abs_diff = std::max(rep.max_abs_diff, std::fabs(log_z - rec.log_r_after));
    }
    rep.t_over_k = recs.back().t_after / static_cast<double>(k);
    rep.expected_t_over_k = 1.0 / (2.0 * sys.lam * (1.0 - sys.lam) * sys.beta);
    return rep;
}

} // namespace swstab
