#ifndef RSTAT_MC_HARNESS_HPP
#define RSTAT_MC_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rstat/core_stats.hpp"
#include "rstat/samplers.hpp"

namespace rstat::mc {

struct SimConfig {
    rng::DistributionSpec spec;
    std::size_t n = 1000;
    std::vector<std::size_t> m_list;
    std::size_t reps = 1;
    std::vector<double> percentiles{5.0, 50.0, 95.0};
    rng::SeedPolicy seed;
    unsigned workers = 1;
};

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::uint64_t> counts;
};

struct SimSummary {
    std::size_t reps = 0;
    std::vector<std::size_t> m_list;
    std::vector<double> percentiles;
    /// percentile_values[i][j]: j-th percentile of R_{m_list[i]} across reps.
    std::vector<std::vector<double>> percentile_values;
    std::vector<Histogram> histograms;
};

using SampleFn = std::function<std::vector<double>(std::size_t, rng::RandomStream&)>;

/// Replication loop: sample, sort, evaluate R at each m; nearest-rank
/// percentiles and a Freedman-Diaconis histogram per m. Deterministic given
/// the seed and independent of the worker count.
SimSummary run_r_distribution(const SimConfig& cfg);

/// Same loop with an injected sampling function (test seam for degenerate
/// distributions the spec grammar does not admit).
SimSummary run_r_distribution_with(const SampleFn& sample_fn, const SimConfig& cfg);

struct LabeledRatioCurve {
    core::RatioSeries series;
    std::vector<double> sorted_values;
    std::vector<rng::Origin> sorted_labels;
};

/// One sample's full R-curve with origin labels carried through the sort.
LabeledRatioCurve r_curve(const rng::DistributionSpec& spec, std::size_t n,
                          const rng::SeedPolicy& seed, std::uint64_t replication = 0);

/// Nearest-rank percentile of an already sorted buffer.
double nearest_rank_percentile(const std::vector<double>& sorted_values, double percentile);

/// Freedman-Diaconis bin count with a deterministic fallback of 64 bins.
Histogram make_histogram(const std::vector<double>& sorted_values);

}  // namespace rstat::mc

#endif
