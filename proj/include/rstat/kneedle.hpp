#ifndef RSTAT_KNEEDLE_HPP
#define RSTAT_KNEEDLE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "rstat/core_stats.hpp"
#include "rstat/errors.hpp"

namespace rstat::knee {

/// Discrete curve with strictly increasing abscissae, length >= 3.
struct Curve {
    std::vector<double> x;
    std::vector<double> y;
};

enum class Direction {
    increasing_convex,   // R-curves: tail bends upward
    increasing_concave,
    decreasing_convex,
    decreasing_concave,
};

struct KneedleConfig {
    double sensitivity = 5.0;
    std::size_t smoothing_window = 1;  // odd; 1 = no smoothing
    Direction direction = Direction::increasing_convex;
};

struct ElbowResult {
    bool found = false;
    std::size_t index = 0;  // position in the input curve
    double x_at_knee = 0.0;
    double y_at_knee = 0.0;  // the selected kappa when run on an R-curve
};

/// K = fpp / (1 + fp^2)^(3/2).
double curvature(double fp, double fpp);

/// Menger curvature of each interior point triple (4*Area/(|a||b||c|));
/// endpoints and collinear triples get 0.
std::vector<double> discrete_curvature(const Curve& curve);

/// Kneedle pipeline: optional centered moving-average smoothing, min-max
/// normalization, direction-specific difference curve, local-maximum
/// candidates (earliest wins on plateaus), confirmation when the difference
/// curve drops below y_d(candidate) - sensitivity * mean(dx_norm) before the
/// next candidate. First confirmed candidate is returned.
ElbowResult detect_knee(const Curve& curve, const KneedleConfig& cfg);

struct KappaSelection {
    double kappa = 0.0;
    std::size_t m_star = 0;
};

/// Builds the R-curve (x = m, y = R_m), runs detect_knee with the
/// increasing-convex direction and returns kappa = R_{m*}. Empty when no
/// knee is confirmed.
std::optional<KappaSelection> kappa_from_sample(const core::SortedSample& s,
                                                const KneedleConfig& cfg);

}  // namespace rstat::knee

#endif
