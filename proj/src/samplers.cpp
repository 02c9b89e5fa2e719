#include "rstat/samplers.hpp"

#include <cmath>
#include <charconv>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace rstat::rng {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t substream) {
    std::uint64_t z = splitmix(root);
    z = splitmix(z ^ splitmix(stream ^ 0xD1B54A32D192ED03ULL));
    z = splitmix(z ^ splitmix(substream ^ 0x8CB92BA72F3D8DD7ULL));
    return z;
}

double parse_double_field(std::string_view value, std::string_view field) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw BadSpec("bad numeric value for '" + std::string(field) + "': " + std::string(value));
    }
    return out;
}

std::unordered_map<std::string, std::string> parse_kv(std::string_view body) {
    std::unordered_map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < body.size()) {
        const std::size_t comma = body.find(',', pos);
        const std::string_view item =
            body.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw BadSpec("expected key=value, got '" + std::string(item) + "'");
        }
        kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return kv;
}

double take_double(std::unordered_map<std::string, std::string>& kv, const std::string& key,
                   double fallback, bool required = false) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        if (required) throw BadSpec("missing required field '" + key + "'");
        return fallback;
    }
    const double out = parse_double_field(it->second, key);
    kv.erase(it);
    return out;
}

}  // namespace

void validate_spec(const DistributionSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                if (!(s.theta > 0.0)) throw BadSpec("exp: theta must be > 0");
            } else if constexpr (std::is_same_v<T, Pareto>) {
                if (!(s.alpha > 0.0)) throw BadSpec("pareto: alpha must be > 0");
                if (!(s.x_min > 0.0)) throw BadSpec("pareto: xmin must be > 0");
            } else if constexpr (std::is_same_v<T, IdentifiedOutliers>) {
                if (!(s.theta > 0.0)) throw BadSpec("ident: theta must be > 0");
                if (!(s.b >= 1.0)) throw BadSpec("ident: b must be >= 1");
                if (s.k >= s.n) throw BadSpec("ident: k must be < n");
            }
        },
        spec);
}

DistributionSpec parse_spec(std::string_view text) {
    const std::size_t colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    auto kv = colon == std::string_view::npos
                  ? std::unordered_map<std::string, std::string>{}
                  : parse_kv(text.substr(colon + 1));

    DistributionSpec spec;
    if (head == "exp") {
        spec = Exponential{take_double(kv, "theta", 1.0)};
    } else if (head == "halfnormal") {
        spec = HalfNormal{};
    } else if (head == "pareto") {
        spec = Pareto{take_double(kv, "alpha", 0.0, true), take_double(kv, "xmin", 1.0)};
    } else if (head == "ident") {
        IdentifiedOutliers io;
        io.n = static_cast<std::size_t>(take_double(kv, "n", 0.0, true));
        io.k = static_cast<std::size_t>(take_double(kv, "k", 0.0, true));
        io.theta = take_double(kv, "theta", 1.0);
        io.b = take_double(kv, "b", 1.0);
        spec = io;
    } else {
        throw BadSpec("unknown distribution '" + std::string(head) +
                      "'; expected exp:theta=..., halfnormal, pareto:alpha=...,xmin=..., "
                      "ident:n=...,k=...,theta=...,b=...");
    }
    if (!kv.empty()) throw BadSpec("unknown field '" + kv.begin()->first + "'");
    validate_spec(spec);
    return spec;
}

std::string spec_to_string(const DistributionSpec& spec) {
    std::ostringstream os;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                os << "exp:theta=" << s.theta;
            } else if constexpr (std::is_same_v<T, HalfNormal>) {
                os << "halfnormal";
            } else if constexpr (std::is_same_v<T, Pareto>) {
                os << "pareto:alpha=" << s.alpha << ",xmin=" << s.x_min;
            } else {
                os << "ident:n=" << s.n << ",k=" << s.k << ",theta=" << s.theta << ",b=" << s.b;
            }
        },
        spec);
    return os.str();
}

RandomStream::RandomStream(std::uint64_t root_seed, std::uint64_t stream, std::uint64_t substream)
    : engine_(derive_seed(root_seed, stream, substream)) {}

double RandomStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::exponential(double theta) {
    // 1-U keeps the argument of log away from 0 at U = 0 exactly.
    return -theta * std::log1p(-uniform());
}

double RandomStream::half_normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::abs(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
}

double RandomStream::pareto(double alpha, double x_min) {
    return x_min * std::pow(1.0 - uniform(), -1.0 / alpha);
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, RandomStream& stream) {
    return sample_labeled(spec, n, stream).values;
}

LabeledSample sample_labeled(const DistributionSpec& spec, std::size_t n, RandomStream& stream) {
    validate_spec(spec);
    if (n < 1) throw BadSpec("sample size must be >= 1");

    LabeledSample out;
    out.values.reserve(n);
    out.labels.assign(n, Origin::base);

    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                for (std::size_t i = 0; i < n; ++i) out.values.push_back(stream.exponential(s.theta));
            } else if constexpr (std::is_same_v<T, HalfNormal>) {
                for (std::size_t i = 0; i < n; ++i) out.values.push_back(stream.half_normal());
            } else if constexpr (std::is_same_v<T, Pareto>) {
                for (std::size_t i = 0; i < n; ++i) out.values.push_back(stream.pareto(s.alpha, s.x_min));
            } else {
                if (s.k >= n) throw BadSpec("ident: k must be < requested sample size");
                for (std::size_t i = 0; i < n - s.k; ++i) out.values.push_back(stream.exponential(s.theta));
                for (std::size_t i = n - s.k; i < n; ++i) {
                    out.values.push_back(stream.exponential(s.b * s.theta));
                    out.labels[i] = Origin::contaminant;
                }
            }
        },
        spec);
    return out;
}

}  // namespace rstat::rng
