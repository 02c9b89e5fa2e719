#ifndef RSTAT_TAIL_EXPERIMENT_HPP
#define RSTAT_TAIL_EXPERIMENT_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "rstat/kneedle.hpp"
#include "rstat/samplers.hpp"

namespace rstat::tail {

struct TailExperimentConfig {
    double alpha1 = 1.5;
    double alpha2 = 2.5;
    double x_min = 1.0;
    std::size_t sample_size = 0;  // N per distribution
    std::size_t reps = 1;
    /// Fixed threshold; when absent, calibrated from an alpha1 sample.
    std::optional<double> kappa;
    std::size_t calibration_n = 1000;
    knee::KneedleConfig kneedle;
    rng::SeedPolicy seed;
    unsigned workers = 1;
    bool allow_equal = false;  // permit alpha2 == alpha1 (symmetry checks)
};

struct TailExperimentResult {
    struct Replication {
        bool split_found = false;
        /// Data value at the alpha1 sample's first R-exceedance of kappa.
        double threshold_value = 0.0;
        std::size_t above_count = 0;
        /// Share of above-threshold pooled observations drawn from the
        /// heavier (alpha1) tail; the experiment's headline statistic.
        double fraction_heavier = 0.0;
        double fraction_alpha2 = 0.0;
    };

    double kappa_used = 0.0;
    std::vector<Replication> replications;
    std::size_t no_split_count = 0;
    /// Aggregates over replications with a split.
    double mean_fraction_heavier = 0.0;
    double variance_fraction_heavier = 0.0;
    double mean_fraction_alpha2 = 0.0;
};

/// Draws a Pareto(alpha1) sample of the given size and selects kappa with
/// the kneedle pipeline. Retries up to 5 deterministically derived streams
/// on NotFound before propagating it.
double calibrate_threshold(double alpha1, std::size_t n, const knee::KneedleConfig& cfg,
                           const rng::SeedPolicy& seed);

/// Per replication: N draws from each tail, the split value from the alpha1
/// sample's own R-series at kappa, and the origin-label fractions among
/// pooled observations above it. Replications without a split are counted
/// separately and excluded from the aggregates.
TailExperimentResult run_tail_experiment(const TailExperimentConfig& cfg);

}  // namespace rstat::tail

#endif
