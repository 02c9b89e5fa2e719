#ifndef RSTAT_SAMPLERS_HPP
#define RSTAT_SAMPLERS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rstat/errors.hpp"

namespace rstat::rng {

// theta is the scale (mean): F(x) = 1 - exp(-x/theta).
struct Exponential {
    double theta = 1.0;
    bool operator==(const Exponential&) const = default;
};

// |Z| with Z standard normal.
struct HalfNormal {
    bool operator==(const HalfNormal&) const = default;
};

struct Pareto {
    double alpha = 1.0;
    double x_min = 1.0;
    bool operator==(const Pareto&) const = default;
};

// n - k draws Exponential(theta) plus k contaminant draws Exponential(b*theta),
// contaminants at the tail of the raw sequence.
struct IdentifiedOutliers {
    std::size_t n = 0;
    std::size_t k = 0;
    double theta = 1.0;
    double b = 1.0;
    bool operator==(const IdentifiedOutliers&) const = default;
};

using DistributionSpec = std::variant<Exponential, HalfNormal, Pareto, IdentifiedOutliers>;

/// Throws BadSpec on invalid parameters (non-positive theta/alpha/x_min,
/// b < 1, k >= n).
void validate_spec(const DistributionSpec& spec);

/// Parses the CLI grammar: `exp:theta=1`, `halfnormal`,
/// `pareto:alpha=1.5,xmin=1`, `ident:n=1000,k=100,theta=1,b=3`.
DistributionSpec parse_spec(std::string_view text);

std::string spec_to_string(const DistributionSpec& spec);

/// Root seed plus deterministic per-replication stream derivation.
/// Identical (root_seed, stream) pairs reproduce identical draws regardless
/// of execution order or worker count.
struct SeedPolicy {
    std::uint64_t root_seed = 0;
};

/// One derived random stream. All variates are generated from explicitly
/// specified transforms of 53-bit uniforms so sequences are bit-identical
/// across platforms (std::mt19937_64 is fully specified; the standard
/// distributions are not, so none are used).
class RandomStream {
public:
    RandomStream(std::uint64_t root_seed, std::uint64_t stream, std::uint64_t substream = 0);

    /// U in [0, 1).
    double uniform();

    double exponential(double theta);
    double half_normal();
    double pareto(double alpha, double x_min);

private:
    std::mt19937_64 engine_;
};

enum class Origin : std::uint8_t { base = 0, contaminant = 1 };

struct LabeledSample {
    std::vector<double> values;
    std::vector<Origin> labels;
};

/// n draws from the spec. For IdentifiedOutliers the requested n is used with
/// the spec's k contaminants (k < n required).
std::vector<double> sample(const DistributionSpec& spec, std::size_t n, RandomStream& stream);

/// Same draws as sample(), with the origin-label side channel.
LabeledSample sample_labeled(const DistributionSpec& spec, std::size_t n, RandomStream& stream);

}  // namespace rstat::rng

#endif
