#include "rstat/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace rstat::mc {

namespace {

void validate(const SimConfig& cfg) {
    if (cfg.n < 2) throw std::invalid_argument("n must be >= 2");
    if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
    if (cfg.m_list.empty()) throw std::invalid_argument("m_list must not be empty");
    for (const std::size_t m : cfg.m_list) {
        if (m < 1 || m > cfg.n - 1) throw std::invalid_argument("every m must lie in [1, n-1]");
    }
    for (const double p : cfg.percentiles) {
        if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentiles must lie in [0,100]");
    }
}

void run_partition(const SampleFn& sample_fn, const SimConfig& cfg, std::size_t rep_begin,
                   std::size_t rep_end, std::vector<std::vector<double>>& r_values) {
    for (std::size_t rep = rep_begin; rep < rep_end; ++rep) {
        rng::RandomStream stream(cfg.seed.root_seed, rep);
        core::SortedSample sorted = core::make_sorted_sample(sample_fn(cfg.n, stream));
        for (std::size_t i = 0; i < cfg.m_list.size(); ++i) {
            r_values[i][rep] = core::r_statistic(sorted, cfg.m_list[i]);
        }
    }
}

}  // namespace

double nearest_rank_percentile(const std::vector<double>& sorted_values, double percentile) {
    if (sorted_values.empty()) throw std::invalid_argument("empty buffer");
    const auto count = static_cast<double>(sorted_values.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * count));
    rank = std::clamp<std::size_t>(rank, 1, sorted_values.size());
    return sorted_values[rank - 1];
}

Histogram make_histogram(const std::vector<double>& sorted_values) {
    Histogram h;
    h.lo = sorted_values.front();
    h.hi = sorted_values.back();
    const double iqr = nearest_rank_percentile(sorted_values, 75.0) -
                       nearest_rank_percentile(sorted_values, 25.0);
    const double width =
        2.0 * iqr / std::cbrt(static_cast<double>(sorted_values.size()));
    std::size_t bins = 64;
    if (width > 0.0 && h.hi > h.lo) {
        bins = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::ceil((h.hi - h.lo) / width)), 1, 4096);
    }
    h.counts.assign(bins, 0);
    if (h.hi <= h.lo) {
        h.counts[0] = sorted_values.size();
        return h;
    }
    const double scale = static_cast<double>(bins) / (h.hi - h.lo);
    for (const double v : sorted_values) {
        auto bin = static_cast<std::size_t>((v - h.lo) * scale);
        h.counts[std::min(bin, bins - 1)] += 1;
    }
    return h;
}

SimSummary run_r_distribution_with(const SampleFn& sample_fn, const SimConfig& cfg) {
    validate(cfg);
    std::vector<std::vector<double>> r_values(cfg.m_list.size(),
                                              std::vector<double>(cfg.reps, 0.0));

    const unsigned workers = std::max(1u, cfg.workers);
    if (workers == 1 || cfg.reps < 2 * workers) {
        run_partition(sample_fn, cfg, 0, cfg.reps, r_values);
    } else {
        // Static partition over replication indices; each replication owns a
        // derived stream, so the result is independent of the worker count.
        std::vector<std::thread> pool;
        const std::size_t chunk = (cfg.reps + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min<std::size_t>(begin + chunk, cfg.reps);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                run_partition(sample_fn, cfg, begin, end, r_values);
            });
        }
        for (std::thread& t : pool) t.join();
    }

    SimSummary summary;
    summary.reps = cfg.reps;
    summary.m_list = cfg.m_list;
    summary.percentiles = cfg.percentiles;
    summary.percentile_values.resize(cfg.m_list.size());
    summary.histograms.resize(cfg.m_list.size());
    for (std::size_t i = 0; i < cfg.m_list.size(); ++i) {
        std::sort(r_values[i].begin(), r_values[i].end());
        summary.percentile_values[i].reserve(cfg.percentiles.size());
        for (const double p : cfg.percentiles) {
            summary.percentile_values[i].push_back(nearest_rank_percentile(r_values[i], p));
        }
        summary.histograms[i] = make_histogram(r_values[i]);
    }
    return summary;
}

SimSummary run_r_distribution(const SimConfig& cfg) {
    rng::validate_spec(cfg.spec);
    const SampleFn fn = [&cfg](std::size_t n, rng::RandomStream& stream) {
        return rng::sample(cfg.spec, n, stream);
    };
    return run_r_distribution_with(fn, cfg);
}

LabeledRatioCurve r_curve(const rng::DistributionSpec& spec, std::size_t n,
                          const rng::SeedPolicy& seed, std::uint64_t replication) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    rng::RandomStream stream(seed.root_seed, replication);
    rng::LabeledSample raw = rng::sample_labeled(spec, n, stream);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return raw.values[a] < raw.values[b]; });

    LabeledRatioCurve curve;
    curve.sorted_values.reserve(n);
    curve.sorted_labels.reserve(n);
    for (const std::size_t idx : order) {
        curve.sorted_values.push_back(raw.values[idx]);
        curve.sorted_labels.push_back(raw.labels[idx]);
    }
    curve.series = core::r_series(core::make_sorted_sample(curve.sorted_values));
    return curve;
}

}  // namespace rstat::mc
