#ifndef RSTAT_TEST_SUPPORT_HPP
#define RSTAT_TEST_SUPPORT_HPP

// Test-only oracles and helpers. Everything here stays independent of the
// implementation path it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace testo {

inline double binomial_se(double p_hat, std::size_t n) {
    return std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / static_cast<double>(n));
}

/// Kolmogorov-Smirnov distance between a sample and an analytic CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

/// Brute-force block-mean outlier count: direct double loop over the
/// definition, no prefix sums.
inline std::size_t brute_force_outlier_count(std::vector<double> values, double kappa) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double bottom =
            std::accumulate(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(i), 0.0) /
            static_cast<double>(i);
        const double top =
            std::accumulate(values.begin() + static_cast<std::ptrdiff_t>(i), values.end(), 0.0) /
            static_cast<double>(n - i);
        if (bottom < kappa * top) return n - i;
    }
    return 0;
}

/// Gamma(k, 1) density, closed form.
inline double gamma_pdf(std::size_t k, double x) {
    if (x <= 0.0) return k == 1 ? std::exp(-x) : 0.0;
    return std::exp((static_cast<double>(k) - 1.0) * std::log(x) - x -
                    std::lgamma(static_cast<double>(k)));
}

/// Lower incomplete gamma for integer k, valid for any real z (analytic
/// continuation included). The power series is cancellation-free for z >= 0
/// and safely alternating for |z| < k; the finite-sum continuation handles
/// large negative z, where the series would blow up.
inline double lower_incomplete_gamma_int(std::size_t k, double z) {
    const double kd = static_cast<double>(k);
    if (z >= 0.0 || std::abs(z) < kd) {
        // gamma(k, z) = z^k e^{-z} sum_j z^j / (k (k+1) ... (k+j))
        double term = 1.0 / kd, series = term;
        for (std::size_t j = 1; j < 100000; ++j) {
            term *= z / (kd + static_cast<double>(j));
            series += term;
            if (std::abs(term) < 1e-18 * std::abs(series)) break;
        }
        return std::pow(z, kd) * std::exp(-z) * series;
    }
    double partial = 0.0, term = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j > 0) term *= z / static_cast<double>(j);
        partial += term;
    }
    double factorial = 1.0;
    for (std::size_t j = 2; j < k; ++j) factorial *= static_cast<double>(j);
    return factorial * (1.0 - std::exp(-z) * partial);
}

/// Rényi-representation mean of T_{n-m} for the standard exponential:
/// sum_{i=m+1}^n sum_{k=1}^i 1/(n-k+1), computed by the literal double loop.
inline double renyi_top_sum_mean(std::size_t n, std::size_t m) {
    double total = 0.0;
    for (std::size_t i = m + 1; i <= n; ++i) {
        for (std::size_t k = 1; k <= i; ++k) {
            total += 1.0 / static_cast<double>(n - k + 1);
        }
    }
    return total;
}

/// Deterministic xorshift-based generator for test inputs, independent of
/// the library's stream derivation.
class TestRng {
public:
    explicit TestRng(std::uint64_t seed) : state_(seed ? seed : 0x5DEECE66DULL) {}

    std::uint64_t next() {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 7;
        state_ ^= state_ << 17;
        return state_;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double exponential(double theta) { return -theta * std::log1p(-uniform()); }

private:
    std::uint64_t state_;
};

}  // namespace testo

#endif
