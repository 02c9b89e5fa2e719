// rstat: order-statistic ratio outlier toolkit.
//
// Subcommands: detect, simulate, exact, knee, pareto. Structured output is
// line-delimited JSON plus CSV tables for plotting; every run records a
// manifest that, together with the inputs, reproduces the outputs.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rstat/core_stats.hpp"
#include "rstat/exact_exponential.hpp"
#include "rstat/kneedle.hpp"
#include "rstat/mc_harness.hpp"
#include "rstat/samplers.hpp"
#include "rstat/tail_experiment.hpp"
#include "rstat/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rstat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotFound = 2;
constexpr int kExitNegativeValue = 3;

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RSTAT_SEED")) {
        std::uint64_t value = 0;
        const std::string_view text(env);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec == std::errc{} && ptr == text.data() + text.size()) return value;
        throw Error("RSTAT_SEED is not a valid integer: " + std::string(env));
    }
    return 0;
}

class ManifestTimer {
public:
    explicit ManifestTimer(std::string subcommand)
        : subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {}

    json finish(json config, std::uint64_t root_seed) const {
        const auto elapsed = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - start_).count();
        return json{{"record", "manifest"},
                    {"subcommand", subcommand_},
                    {"config", std::move(config)},
                    {"root_seed", root_seed},
                    {"version", kVersion},
                    {"duration_seconds", elapsed}};
    }

private:
    std::string subcommand_;
    std::chrono::steady_clock::time_point start_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

// One numeric per line; '#' comments and blank lines skipped; a single
// non-numeric header line is tolerated.
std::vector<double> read_value_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input: " + path.string());
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string token;
        if (!(row >> token)) continue;  // blank
        try {
            values.push_back(std::stod(token));
            header_allowed = false;
        } catch (const std::exception&) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw Error("line " + std::to_string(line_no) + ": not a number: " + token);
        }
    }
    return values;
}

knee::Curve read_curve_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input: " + path.string());
    knee::Curve curve;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (char& c : line) {
            if (c == ',') c = ' ';
        }
        std::istringstream row(line);
        std::string sx, sy;
        if (!(row >> sx)) continue;
        std::string extra;
        if (!(row >> sy) || (row >> extra)) {
            throw Error("line " + std::to_string(line_no) + ": expected two columns");
        }
        try {
            curve.x.push_back(std::stod(sx));
            curve.y.push_back(std::stod(sy));
        } catch (const std::exception&) {
            throw Error("line " + std::to_string(line_no) + ": not numeric: " + sx + " " + sy);
        }
    }
    return curve;
}

std::optional<double> parse_kappa_or_auto(const std::string& text) {
    if (text == "auto") return std::nullopt;
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw Error("--kappa must be a number or 'auto', got: " + text);
    }
}

void emit_record(const json& record, const std::optional<fs::path>& output) {
    if (output) {
        write_text(*output, record.dump() + "\n");
    } else {
        std::cout << record.dump() << "\n";
    }
}

void emit_manifest(const json& manifest, const std::optional<fs::path>& output) {
    if (output) {
        write_text(fs::path(output->string() + ".manifest.json"), manifest.dump(2) + "\n");
    } else {
        std::cout << manifest.dump() << "\n";
    }
}

// ---- detect ---------------------------------------------------------------

struct DetectArgs {
    std::string input;
    std::string kappa{"auto"};
    double sensitivity = 5.0;
    std::string output;
};

int cmd_detect(const DetectArgs& args) {
    const ManifestTimer timer("detect");
    const std::optional<fs::path> output =
        args.output.empty() ? std::nullopt : std::optional<fs::path>(args.output);

    const std::vector<double> raw = read_value_file(args.input);
    const auto sorted = core::make_sorted_sample(raw);

    const std::optional<double> fixed_kappa = parse_kappa_or_auto(args.kappa);
    double kappa = 0.0;
    std::size_t auto_m_star = 0;
    if (fixed_kappa) {
        kappa = *fixed_kappa;
    } else {
        knee::KneedleConfig cfg;
        cfg.sensitivity = args.sensitivity;
        const auto selection = knee::kappa_from_sample(sorted, cfg);
        if (!selection) {
            std::cerr << "no knee confirmed; cannot choose kappa automatically\n";
            return kExitNotFound;
        }
        kappa = selection->kappa;
        auto_m_star = selection->m_star;
    }

    const auto report = core::detect_outliers(sorted, kappa);
    json record{{"record", "outlier_report"},
                {"n", sorted.size()},
                {"kappa", report.kappa},
                {"kappa_mode", fixed_kappa ? "fixed" : "auto"},
                {"m_star", report.m_star},
                {"split_found", report.split_found},
                {"outlier_count", report.outlier_positions.size()}};
    if (!fixed_kappa) record["knee_m_star"] = auto_m_star;
    if (report.o_n) record["o_n"] = *report.o_n;
    json outliers = json::array();
    for (const std::size_t pos : report.outlier_positions) {
        outliers.push_back({{"rank", pos}, {"value", sorted.values()[pos - 1]}});
    }
    record["outliers"] = std::move(outliers);

    json config{{"input", args.input},
                {"kappa", args.kappa},
                {"sensitivity", args.sensitivity},
                {"output", args.output}};
    emit_manifest(timer.finish(std::move(config), 0), output);
    emit_record(record, output);
    return kExitOk;
}

// ---- knee -----------------------------------------------------------------

struct KneeArgs {
    std::string input;
    double sensitivity = 5.0;
    std::size_t smoothing = 1;
    std::string direction{"increasing-convex"};
    std::string output;
};

int cmd_knee(const KneeArgs& args) {
    const ManifestTimer timer("knee");
    const std::optional<fs::path> output =
        args.output.empty() ? std::nullopt : std::optional<fs::path>(args.output);

    knee::KneedleConfig cfg;
    cfg.sensitivity = args.sensitivity;
    cfg.smoothing_window = args.smoothing;
    if (args.direction == "increasing-convex") {
        cfg.direction = knee::Direction::increasing_convex;
    } else if (args.direction == "increasing-concave") {
        cfg.direction = knee::Direction::increasing_concave;
    } else if (args.direction == "decreasing-convex") {
        cfg.direction = knee::Direction::decreasing_convex;
    } else if (args.direction == "decreasing-concave") {
        cfg.direction = knee::Direction::decreasing_concave;
    } else {
        throw Error("unknown direction: " + args.direction);
    }

    const auto result = knee::detect_knee(read_curve_file(args.input), cfg);
    json record{{"record", "elbow_result"},
                {"found", result.found},
                {"index", result.index},
                {"x_at_knee", result.x_at_knee},
                {"y_at_knee", result.y_at_knee}};
    json config{{"input", args.input},
                {"sensitivity", args.sensitivity},
                {"smoothing", args.smoothing},
                {"direction", args.direction}};
    emit_manifest(timer.finish(std::move(config), 0), output);
    emit_record(record, output);
    return result.found ? kExitOk : kExitNotFound;
}

// ---- exact ----------------------------------------------------------------

struct ExactArgs {
    std::size_t n = 10;
    std::size_t m = 2;
    double kappa = 0.1;
    double theta = 1.0;
};

int cmd_exact(const ExactArgs& args) {
    const ManifestTimer timer("exact");
    const auto model = exact::exponential_parent(args.theta);
    // point = P(S_{m-1}/T_{n-m} < kappa); [lower, upper] brackets
    // P(S_m/T_{n-m} <= kappa).
    const double shift = 1.0 / static_cast<double>(args.n - args.m);
    const double kappas[2] = {args.kappa - shift, args.kappa};
    const auto probs = exact::prob_R_less_kappa_batch(model, args.n, args.m, kappas);

    json record{{"record", "exact_probability"},
                {"n", args.n},
                {"m", args.m},
                {"kappa", args.kappa},
                {"theta", args.theta},
                {"point", probs[1]},
                {"lower", probs[0]},
                {"upper", probs[1]}};
    json config{{"n", args.n}, {"m", args.m}, {"kappa", args.kappa}, {"theta", args.theta}};
    emit_manifest(timer.finish(std::move(config), 0), std::nullopt);
    emit_record(record, std::nullopt);
    return kExitOk;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string dist;
    std::size_t n = 1000;
    std::size_t reps = 1;
    std::string m_list;
    std::string percentiles{"5,50,95"};
    std::size_t curves = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned workers = 1;
    std::string out{"."};
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            if constexpr (std::is_same_v<T, std::size_t>) {
                out.push_back(static_cast<std::size_t>(std::stoull(item)));
            } else {
                out.push_back(std::stod(item));
            }
        } catch (const std::exception&) {
            throw Error(std::string("bad ") + what + " entry: " + item);
        }
    }
    if (out.empty()) throw Error(std::string("empty ") + what + " list");
    return out;
}

int cmd_simulate(const SimulateArgs& args) {
    const ManifestTimer timer("simulate");
    mc::SimConfig cfg;
    cfg.spec = rng::parse_spec(args.dist);
    cfg.n = args.n;
    cfg.reps = args.reps;
    cfg.m_list = parse_list<std::size_t>(args.m_list, "m");
    cfg.percentiles = parse_list<double>(args.percentiles, "percentile");
    cfg.seed = {args.seed_given ? args.seed : default_seed()};
    cfg.workers = args.workers;

    const auto summary = mc::run_r_distribution(cfg);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);

    std::string pct_csv = "m,percentile,value\n";
    for (std::size_t i = 0; i < summary.m_list.size(); ++i) {
        for (std::size_t j = 0; j < summary.percentiles.size(); ++j) {
            pct_csv += std::to_string(summary.m_list[i]) + "," +
                       format_double(summary.percentiles[j]) + "," +
                       format_double(summary.percentile_values[i][j]) + "\n";
        }
    }
    write_text(out_dir / "percentiles.csv", pct_csv);

    json summary_json{{"record", "sim_summary"},
                      {"reps", summary.reps},
                      {"m_list", summary.m_list},
                      {"percentiles", summary.percentiles},
                      {"percentile_values", summary.percentile_values}};
    for (std::size_t i = 0; i < summary.m_list.size(); ++i) {
        const auto& h = summary.histograms[i];
        std::string hist_csv = "bin_lo,bin_hi,count\n";
        const double width =
            h.counts.size() > 0 ? (h.hi - h.lo) / static_cast<double>(h.counts.size()) : 0.0;
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            hist_csv += format_double(h.lo + width * static_cast<double>(b)) + "," +
                        format_double(h.lo + width * static_cast<double>(b + 1)) + "," +
                        std::to_string(h.counts[b]) + "\n";
        }
        write_text(out_dir / ("histogram_m" + std::to_string(summary.m_list[i]) + ".csv"),
                   hist_csv);
    }
    write_text(out_dir / "summary.json", summary_json.dump(2) + "\n");

    // Raw per-sample R-curves for plotting and knee input.
    for (std::size_t rep = 0; rep < args.curves; ++rep) {
        const auto curve = mc::r_curve(cfg.spec, cfg.n, cfg.seed, rep);
        std::string csv = "m,r,sorted_value,origin\n";
        for (std::size_t m = 1; m < cfg.n; ++m) {
            csv += std::to_string(m) + "," + format_double(curve.series.at(m)) + "," +
                   format_double(curve.sorted_values[m - 1]) + "," +
                   (curve.sorted_labels[m - 1] == rng::Origin::contaminant ? "contaminant"
                                                                           : "base") +
                   "\n";
        }
        write_text(out_dir / ("curve_rep" + std::to_string(rep) + ".csv"), csv);
    }

    json config{{"dist", args.dist},       {"n", args.n},
                {"reps", args.reps},       {"m", args.m_list},
                {"percentiles", args.percentiles}, {"curves", args.curves},
                {"workers", args.workers}, {"out", args.out}};
    write_text(out_dir / "manifest.json",
               timer.finish(std::move(config), cfg.seed.root_seed).dump(2) + "\n");
    std::cout << "wrote " << (out_dir / "summary.json").string() << "\n";
    return kExitOk;
}

// ---- pareto -----------------------------------------------------------------

struct ParetoArgs {
    double alpha1 = 1.5;
    double alpha2 = 2.5;
    std::size_t sample_size = 0;
    std::size_t reps = 1;
    std::string kappa{"auto"};
    std::size_t calibration_n = 1000;
    double sensitivity = 5.0;
    double x_min = 1.0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned workers = 1;
    bool allow_equal = false;
    std::string out{"."};
};

int cmd_pareto(const ParetoArgs& args) {
    const ManifestTimer timer("pareto");
    tail::TailExperimentConfig cfg;
    cfg.alpha1 = args.alpha1;
    cfg.alpha2 = args.alpha2;
    cfg.x_min = args.x_min;
    cfg.sample_size = args.sample_size;
    cfg.reps = args.reps;
    cfg.kappa = parse_kappa_or_auto(args.kappa);
    cfg.calibration_n = args.calibration_n;
    cfg.kneedle.sensitivity = args.sensitivity;
    cfg.seed = {args.seed_given ? args.seed : default_seed()};
    cfg.workers = args.workers;
    cfg.allow_equal = args.allow_equal;

    const auto result = tail::run_tail_experiment(cfg);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);

    std::string reps_jsonl;
    for (std::size_t rep = 0; rep < result.replications.size(); ++rep) {
        const auto& r = result.replications[rep];
        json line{{"record", "tail_replication"},
                  {"replication", rep},
                  {"split_found", r.split_found},
                  {"threshold_value", r.threshold_value},
                  {"above_count", r.above_count},
                  {"fraction_heavier", r.fraction_heavier},
                  {"fraction_alpha2", r.fraction_alpha2}};
        reps_jsonl += line.dump() + "\n";
    }
    write_text(out_dir / "replications.jsonl", reps_jsonl);

    // Aggregate record: the expected-percentage column is the heavier-tail
    // share above the threshold.
    json aggregate{{"record", "tail_aggregate"},
                   {"alpha1", args.alpha1},
                   {"alpha2", args.alpha2},
                   {"kappa_threshold", result.kappa_used},
                   {"expected_percentage_above_kappa", result.mean_fraction_heavier},
                   {"variance", result.variance_fraction_heavier},
                   {"mean_fraction_alpha2", result.mean_fraction_alpha2},
                   {"no_split_count", result.no_split_count},
                   {"reps", cfg.reps},
                   {"N", cfg.sample_size}};
    write_text(out_dir / "aggregate.json", aggregate.dump(2) + "\n");

    json config{{"alpha1", args.alpha1},
                {"alpha2", args.alpha2},
                {"N", args.sample_size},
                {"reps", args.reps},
                {"kappa", args.kappa},
                {"calibration_n", args.calibration_n},
                {"sensitivity", args.sensitivity},
                {"xmin", args.x_min},
                {"workers", args.workers},
                {"allow_equal", args.allow_equal},
                {"out", args.out}};
    write_text(out_dir / "manifest.json",
               timer.finish(std::move(config), cfg.seed.root_seed).dump(2) + "\n");
    std::cout << aggregate.dump() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"order-statistic ratio outlier toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "flag outliers in a value file");
    detect->add_option("--input", detect_args.input, "one numeric per line, '#' comments")
        ->required();
    detect->add_option("--kappa", detect_args.kappa, "threshold, or 'auto' for kneedle");
    detect->add_option("--sensitivity", detect_args.sensitivity, "kneedle sensitivity");
    detect->add_option("--output", detect_args.output, "report path (stdout when absent)");

    KneeArgs knee_args;
    auto* knee_cmd = app.add_subcommand("knee", "detect the elbow of an x,y curve file");
    knee_cmd->add_option("--input", knee_args.input, "two-column numeric file")->required();
    knee_cmd->add_option("--sensitivity", knee_args.sensitivity, "kneedle sensitivity");
    knee_cmd->add_option("--smoothing", knee_args.smoothing, "odd moving-average window");
    knee_cmd->add_option("--direction", knee_args.direction,
                         "increasing-convex|increasing-concave|decreasing-convex|decreasing-concave");
    knee_cmd->add_option("--output", knee_args.output, "record path (stdout when absent)");

    ExactArgs exact_args;
    auto* exact_cmd =
        app.add_subcommand("exact", "semi-analytic P(R < kappa) with sandwich bounds");
    exact_cmd->add_option("--n", exact_args.n, "sample size")->required();
    exact_cmd->add_option("--m", exact_args.m, "split index")->required();
    exact_cmd->add_option("--kappa", exact_args.kappa, "threshold")->required();
    exact_cmd->add_option("--theta", exact_args.theta, "exponential scale");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "replicate R-statistic distributions");
    simulate->add_option("--dist", sim_args.dist, "distribution spec string")->required();
    simulate->add_option("--n", sim_args.n, "sample size per replication");
    simulate->add_option("--reps", sim_args.reps, "replication count")->required();
    simulate->add_option("--m", sim_args.m_list, "comma-separated m values")->required();
    simulate->add_option("--percentiles", sim_args.percentiles, "comma-separated percentiles");
    simulate->add_option("--curves", sim_args.curves, "raw R-curve files to emit");
    simulate->add_option("--seed", sim_args.seed, "root seed (default: RSTAT_SEED or 0)")
        ->trigger_on_parse()
        ->each([&sim_args](const std::string&) { sim_args.seed_given = true; });
    simulate->add_option("--workers", sim_args.workers, "parallel workers");
    simulate->add_option("--out", sim_args.out, "output directory");

    ParetoArgs pareto_args;
    auto* pareto = app.add_subcommand("pareto", "two-Pareto-tails discrimination experiment");
    pareto->add_option("--alpha1", pareto_args.alpha1, "heavier tail index")->required();
    pareto->add_option("--alpha2", pareto_args.alpha2, "second tail index")->required();
    pareto->add_option("--N", pareto_args.sample_size, "draws per distribution")->required();
    pareto->add_option("--reps", pareto_args.reps, "replication count")->required();
    pareto->add_option("--kappa", pareto_args.kappa, "threshold, or 'auto' to calibrate");
    pareto->add_option("--calibration-n", pareto_args.calibration_n, "calibration sample size");
    pareto->add_option("--sensitivity", pareto_args.sensitivity, "kneedle sensitivity");
    pareto->add_option("--xmin", pareto_args.x_min, "Pareto scale");
    pareto->add_option("--seed", pareto_args.seed, "root seed (default: RSTAT_SEED or 0)")
        ->trigger_on_parse()
        ->each([&pareto_args](const std::string&) { pareto_args.seed_given = true; });
    pareto->add_option("--workers", pareto_args.workers, "parallel workers");
    pareto->add_flag("--allow-equal", pareto_args.allow_equal, "permit alpha2 == alpha1");
    pareto->add_option("--out", pareto_args.out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*detect) return cmd_detect(detect_args);
        if (*knee_cmd) return cmd_knee(knee_args);
        if (*exact_cmd) return cmd_exact(exact_args);
        if (*simulate) return cmd_simulate(sim_args);
        if (*pareto) return cmd_pareto(pareto_args);
    } catch (const NegativeValue& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNegativeValue;
    } catch (const NotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotFound;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
