#include "rstat/core_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rstat::core {

SortedSample SortedSample::from_raw(std::vector<double> raw) {
    if (raw.size() < 2) {
        throw TooShort("sample needs at least 2 observations, got " + std::to_string(raw.size()));
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i])) throw NonFinite(i);
        if (raw[i] < 0.0) throw NegativeValue(i);
    }
    std::sort(raw.begin(), raw.end());

    SortedSample s;
    s.values_ = std::move(raw);
    s.prefix_.resize(s.values_.size() + 1);
    s.prefix_[0] = 0.0;
    // Neumaier-compensated running sum keeps the ratios stable at n ~ 1e6.
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < s.values_.size(); ++i) {
        const double v = s.values_[i];
        const double t = sum + v;
        comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
        sum = t;
        s.prefix_[i + 1] = sum + comp;
    }
    return s;
}

double r_statistic(const SortedSample& s, std::size_t m) {
    const std::size_t n = s.size();
    if (m < 1 || m > n - 1) throw std::invalid_argument("m must lie in [1, n-1]");
    const double denom = s.top_sum(n - m);
    if (denom <= 0.0) throw ZeroDenominator("top " + std::to_string(n - m) + " values sum to 0");
    return s.bottom_sum(m) / denom;
}

RatioSeries r_series(const SortedSample& s) {
    const std::size_t n = s.size();
    if (s.total() <= 0.0) throw ZeroDenominator("sample sums to 0");
    RatioSeries out;
    out.n = n;
    out.r.resize(n - 1);
    const double total = s.total();
    for (std::size_t m = 1; m < n; ++m) {
        // The top block always contains the maximum, so the denominator is
        // positive whenever the total is.
        out.r[m - 1] = s.prefix(m) / (total - s.prefix(m));
    }
    return out;
}

std::size_t kappa_outlier_count(const SortedSample& s, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0,1)");
    const std::size_t n = s.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double bottom_mean = s.bottom_sum(i) / static_cast<double>(i);
        const double top_mean = s.top_sum(n - i) / static_cast<double>(n - i);
        if (bottom_mean < kappa * top_mean) return n - i;
    }
    return 0;
}

double kappa_rescale(double kappa, std::size_t n, std::size_t m) {
    if (m < 1 || m > n - 1) throw std::invalid_argument("m must lie in [1, n-1]");
    return (static_cast<double>(m) / static_cast<double>(n - m)) * kappa;
}

OutlierReport detect_outliers(const SortedSample& s, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    const std::size_t n = s.size();
    const RatioSeries rs = r_series(s);

    OutlierReport report;
    report.kappa = kappa;
    report.m_star = n - 1;  // sentinel when nothing exceeds kappa
    for (std::size_t m = 1; m < n; ++m) {
        if (rs.at(m) > kappa) {
            report.m_star = m;
            report.split_found = true;
            break;
        }
    }
    if (report.split_found) {
        report.outlier_positions.reserve(n - report.m_star);
        for (std::size_t pos = report.m_star + 1; pos <= n; ++pos) {
            report.outlier_positions.push_back(pos);
        }
    }
    if (kappa > 0.0 && kappa < 1.0) report.o_n = kappa_outlier_count(s, kappa);
    return report;
}

double selection_differential(const SortedSample& s, std::size_t k, double mu, double sigma) {
    if (sigma <= 0.0) throw BadSigma("sigma must be positive");
    if (k < 1 || k > s.size()) throw std::invalid_argument("k must lie in [1, n]");
    return (s.top_sum(k) / static_cast<double>(k) - mu) / sigma;
}

}  // namespace rstat::core
