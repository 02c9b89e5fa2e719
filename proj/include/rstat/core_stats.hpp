#ifndef RSTAT_CORE_STATS_HPP
#define RSTAT_CORE_STATS_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "rstat/errors.hpp"

namespace rstat::core {

/// Nonnegative observations in nondecreasing order with compensated prefix
/// sums. Immutable after construction; safe to share across threads.
///
/// bottom_sum(m) is the sum of the m smallest values (S_m), top_sum(k) the
/// sum of the k largest (T_k).
class SortedSample {
public:
    /// Validates (finite, nonnegative, length >= 2), sorts, and builds
    /// prefix sums with Neumaier summation.
    static SortedSample from_raw(std::vector<double> raw);

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

    /// prefix(i) = sum of the i smallest values, i in [0, n]. prefix(0) = 0.
    double prefix(std::size_t i) const { return prefix_[i]; }

    double bottom_sum(std::size_t m) const { return prefix_[m]; }
    double top_sum(std::size_t k) const { return prefix_.back() - prefix_[values_.size() - k]; }
    double total() const { return prefix_.back(); }

private:
    SortedSample() = default;
    std::vector<double> values_;
    std::vector<double> prefix_;  // length n + 1
};

inline SortedSample make_sorted_sample(std::vector<double> raw) {
    return SortedSample::from_raw(std::move(raw));
}

/// Ratio sequence r[m-1] = S_m / T_{n-m} for m = 1..n-1.
struct RatioSeries {
    std::size_t n = 0;
    std::vector<double> r;

    /// 1-based accessor: at(m) = R_m.
    double at(std::size_t m) const { return r.at(m - 1); }
};

struct OutlierReport {
    double kappa = 0.0;
    /// Smallest m with R_m > kappa; n-1 sentinel when no m exceeds kappa.
    std::size_t m_star = 0;
    bool split_found = false;
    /// 1-based positions in sorted order (m_star+1..n); empty when no split.
    std::vector<std::size_t> outlier_positions;
    /// Block-mean count, filled only for kappa in (0,1).
    std::optional<std::size_t> o_n;
};

/// R_m = S_m / T_{n-m}. Throws ZeroDenominator when the top block sums to 0.
double r_statistic(const SortedSample& s, std::size_t m);

/// All ratios in one pass over the prefix sums. Requires total() > 0.
RatioSeries r_series(const SortedSample& s);

/// Block-mean outlier count: n - min{ i in 1..n-1 : S_i/i < kappa * T_{n-i}/(n-i) },
/// 0 when no index satisfies the condition. kappa must lie in (0,1).
std::size_t kappa_outlier_count(const SortedSample& s, double kappa);

/// Converts the mean-based threshold to the sum-based one: (m/(n-m)) * kappa.
double kappa_rescale(double kappa, std::size_t n, std::size_t m);

/// Flags the top block above the first R-exceedance of kappa.
OutlierReport detect_outliers(const SortedSample& s, double kappa);

/// Standardized mean of the top k values: (T_k/k - mu) / sigma.
double selection_differential(const SortedSample& s, std::size_t k, double mu, double sigma);

}  // namespace rstat::core

#endif
