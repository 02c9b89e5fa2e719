#include "rstat/tail_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "rstat/core_stats.hpp"

namespace rstat::tail {

namespace {

// Calibration attempts use stream ids far above any replication index.
constexpr std::uint64_t kCalibrationStreamBase = std::uint64_t{1} << 62;

void validate(const TailExperimentConfig& cfg) {
    if (!(cfg.alpha1 > 0.0) || !(cfg.alpha2 > 0.0)) throw BadSpec("tail indices must be > 0");
    if (!(cfg.x_min > 0.0)) throw BadSpec("x_min must be > 0");
    if (cfg.allow_equal ? cfg.alpha2 < cfg.alpha1 : cfg.alpha2 <= cfg.alpha1) {
        throw BadSpec("need alpha1 < alpha2 (or --allow-equal for alpha2 == alpha1)");
    }
    if (cfg.sample_size < 2) throw BadSpec("N must be >= 2");
    if (cfg.reps < 1) throw BadSpec("reps must be >= 1");
}

TailExperimentResult::Replication run_replication(const TailExperimentConfig& cfg, double kappa,
                                                  std::uint64_t rep) {
    rng::RandomStream stream(cfg.seed.root_seed, rep);
    const std::size_t count = cfg.sample_size;
    std::vector<double> heavier(count), lighter(count);
    for (double& v : heavier) v = stream.pareto(cfg.alpha1, cfg.x_min);
    for (double& v : lighter) v = stream.pareto(cfg.alpha2, cfg.x_min);

    TailExperimentResult::Replication out;

    // Split value: the alpha1 sample's order statistic at its first
    // R-exceedance of kappa.
    const core::SortedSample sorted = core::make_sorted_sample(heavier);
    const core::RatioSeries series = core::r_series(sorted);
    std::size_t m_star = 0;
    for (std::size_t m = 1; m < count; ++m) {
        if (series.at(m) > kappa) {
            m_star = m;
            break;
        }
    }
    if (m_star == 0) return out;  // NoSplit
    out.split_found = true;
    out.threshold_value = sorted.values()[m_star - 1];

    std::size_t above_heavier = 0, above_lighter = 0;
    for (const double v : heavier) above_heavier += v > out.threshold_value;
    for (const double v : lighter) above_lighter += v > out.threshold_value;
    out.above_count = above_heavier + above_lighter;
    if (out.above_count == 0) {
        out.split_found = false;
        return out;
    }
    out.fraction_heavier =
        static_cast<double>(above_heavier) / static_cast<double>(out.above_count);
    out.fraction_alpha2 = 1.0 - out.fraction_heavier;
    return out;
}

}  // namespace

double calibrate_threshold(double alpha1, std::size_t n, const knee::KneedleConfig& cfg,
                           const rng::SeedPolicy& seed) {
    if (!(alpha1 > 0.0)) throw BadSpec("alpha1 must be > 0");
    if (n < 3) throw BadSpec("calibration sample must have at least 3 observations");
    for (std::uint64_t attempt = 0; attempt < 5; ++attempt) {
        rng::RandomStream stream(seed.root_seed, kCalibrationStreamBase + attempt);
        std::vector<double> draws(n);
        for (double& v : draws) v = stream.pareto(alpha1, 1.0);
        const auto selection =
            knee::kappa_from_sample(core::make_sorted_sample(std::move(draws)), cfg);
        if (selection) return selection->kappa;
    }
    throw NotFound("no knee confirmed in 5 calibration attempts");
}

TailExperimentResult run_tail_experiment(const TailExperimentConfig& cfg) {
    validate(cfg);

    TailExperimentResult result;
    result.kappa_used = cfg.kappa ? *cfg.kappa
                                  : calibrate_threshold(cfg.alpha1, cfg.calibration_n,
                                                        cfg.kneedle, cfg.seed);

    result.replications.resize(cfg.reps);
    const unsigned workers = std::max(1u, cfg.workers);
    if (workers == 1 || cfg.reps < 2 * workers) {
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            result.replications[rep] = run_replication(cfg, result.kappa_used, rep);
        }
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cfg.reps + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min<std::size_t>(begin + chunk, cfg.reps);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                for (std::size_t rep = begin; rep < end; ++rep) {
                    result.replications[rep] = run_replication(cfg, result.kappa_used, rep);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    double sum = 0.0, sum_alpha2 = 0.0;
    std::size_t completed = 0;
    for (const auto& rep : result.replications) {
        if (!rep.split_found) {
            ++result.no_split_count;
            continue;
        }
        sum += rep.fraction_heavier;
        sum_alpha2 += rep.fraction_alpha2;
        ++completed;
    }
    if (completed > 0) {
        result.mean_fraction_heavier = sum / static_cast<double>(completed);
        result.mean_fraction_alpha2 = sum_alpha2 / static_cast<double>(completed);
    }
    if (completed > 1) {
        double ss = 0.0;
        for (const auto& rep : result.replications) {
            if (!rep.split_found) continue;
            const double d = rep.fraction_heavier - result.mean_fraction_heavier;
            ss += d * d;
        }
        result.variance_fraction_heavier = ss / static_cast<double>(completed - 1);
    }
    return result;
}

}  // namespace rstat::tail
