#include "rstat/kneedle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rstat::knee {

namespace {

void validate(const Curve& curve) {
    if (curve.x.size() != curve.y.size()) throw std::invalid_argument("x/y length mismatch");
    if (curve.x.size() < 3) throw TooShort("curve needs at least 3 points");
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        if (!std::isfinite(curve.x[i])) throw NonFinite(i);
        if (!std::isfinite(curve.y[i])) throw NonFinite(i);
        if (i > 0 && !(curve.x[i] > curve.x[i - 1])) {
            throw std::invalid_argument("x must be strictly increasing");
        }
    }
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t window) {
    if (window <= 1) return y;
    if (window % 2 == 0) throw std::invalid_argument("smoothing window must be odd");
    const std::size_t half = window / 2;
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        // Shrink symmetrically at the edges.
        const std::size_t reach = std::min({half, i, y.size() - 1 - i});
        double acc = 0.0;
        for (std::size_t j = i - reach; j <= i + reach; ++j) acc += y[j];
        out[i] = acc / static_cast<double>(2 * reach + 1);
    }
    return out;
}

std::vector<double> normalize(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi - *lo;
    std::vector<double> out(v.size());
    if (span <= 0.0) return out;  // flat: all zeros
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / span;
    return out;
}

}  // namespace

double curvature(double fp, double fpp) {
    return fpp / std::pow(1.0 + fp * fp, 1.5);
}

std::vector<double> discrete_curvature(const Curve& curve) {
    validate(curve);
    const std::size_t n = curve.x.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double ax = curve.x[i - 1] - curve.x[i], ay = curve.y[i - 1] - curve.y[i];
        const double bx = curve.x[i + 1] - curve.x[i], by = curve.y[i + 1] - curve.y[i];
        const double cx = curve.x[i + 1] - curve.x[i - 1], cy = curve.y[i + 1] - curve.y[i - 1];
        const double cross = std::abs(ax * by - ay * bx);
        const double la = std::hypot(ax, ay), lb = std::hypot(bx, by), lc = std::hypot(cx, cy);
        const double denom = la * lb * lc;
        // Degenerate (collinear within rounding) triples get exactly 0.
        out[i] = (denom > 0.0 && cross > 1e-12 * la * lb) ? 2.0 * cross / denom : 0.0;
    }
    return out;
}

ElbowResult detect_knee(const Curve& curve, const KneedleConfig& cfg) {
    validate(curve);
    if (cfg.sensitivity < 0.0) throw std::invalid_argument("sensitivity must be >= 0");
    const std::size_t n = curve.x.size();

    const std::vector<double> smooth = moving_average(curve.y, cfg.smoothing_window);
    const std::vector<double> xn = normalize(curve.x);
    const std::vector<double> yn = normalize(smooth);

    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (cfg.direction) {
            case Direction::increasing_concave: diff[i] = yn[i] - xn[i]; break;
            case Direction::increasing_convex: diff[i] = xn[i] - yn[i]; break;
            case Direction::decreasing_concave: diff[i] = yn[i] + xn[i] - 1.0; break;
            case Direction::decreasing_convex: diff[i] = 1.0 - xn[i] - yn[i]; break;
        }
    }

    // Local maxima of the difference curve; the earliest point of a plateau
    // wins.
    std::vector<bool> is_candidate(n, false);
    std::size_t first_candidate = n;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (diff[i - 1] < diff[i] && diff[i] >= diff[i + 1]) {
            is_candidate[i] = true;
            if (first_candidate == n) first_candidate = i;
        }
    }
    ElbowResult result;
    if (first_candidate == n) return result;

    double mean_dx = 0.0;
    for (std::size_t i = 1; i < n; ++i) mean_dx += xn[i] - xn[i - 1];
    mean_dx /= static_cast<double>(n - 1);

    // A candidate is confirmed when the difference curve drops below its
    // sensitivity-lowered height before the next candidate appears.
    std::size_t current = first_candidate;
    double threshold = diff[current] - cfg.sensitivity * mean_dx;
    for (std::size_t j = first_candidate + 1; j < n; ++j) {
        if (is_candidate[j]) {
            current = j;
            threshold = diff[current] - cfg.sensitivity * mean_dx;
            continue;
        }
        if (diff[j] < threshold) {
            result.found = true;
            result.index = current;
            result.x_at_knee = curve.x[current];
            result.y_at_knee = curve.y[current];
            return result;
        }
    }
    return result;
}

std::optional<KappaSelection> kappa_from_sample(const core::SortedSample& s,
                                                const KneedleConfig& cfg) {
    const core::RatioSeries series = core::r_series(s);
    Curve curve;
    curve.x.resize(series.r.size());
    curve.y = series.r;
    for (std::size_t i = 0; i < curve.x.size(); ++i) curve.x[i] = static_cast<double>(i + 1);

    KneedleConfig run_cfg = cfg;
    run_cfg.direction = Direction::increasing_convex;
    const ElbowResult knee = detect_knee(curve, run_cfg);
    if (!knee.found) return std::nullopt;
    const std::size_t m_star = knee.index + 1;  // curve index i holds m = i+1
    return KappaSelection{series.at(m_star), m_star};
}

}  // namespace rstat::knee
