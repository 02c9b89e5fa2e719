#ifndef RSTAT_ERRORS_HPP
#define RSTAT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rstat {

/// Base type for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NegativeValue : Error {
    explicit NegativeValue(std::size_t index)
        : Error("negative value at index " + std::to_string(index)), index(index) {}
    std::size_t index;
};

struct NonFinite : Error {
    explicit NonFinite(std::size_t index)
        : Error("non-finite value at index " + std::to_string(index)), index(index) {}
    std::size_t index;
};

struct TooShort : Error {
    using Error::Error;
};

struct ZeroDenominator : Error {
    using Error::Error;
};

struct BadSigma : Error {
    using Error::Error;
};

struct DegenerateTruncation : Error {
    using Error::Error;
};

struct GridTooCoarse : Error {
    using Error::Error;
};

struct DuplicateRates : Error {
    using Error::Error;
};

struct QuadratureFailure : Error {
    using Error::Error;
};

struct BadSpec : Error {
    using Error::Error;
};

struct NotFound : Error {
    using Error::Error;
};

struct Cancelled : Error {
    using Error::Error;
};

}  // namespace rstat

#endif
