#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spgd {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad caller input (dimension mismatch, preconditions).
struct InputError : Error {
    using Error::Error;
};

// Malformed or semantically invalid configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Query outside the domain of a function / process.
struct RangeError : Error {
    using Error::Error;
};

// Non-finite value encountered; carries the step index where it appeared.
struct NumericalError : Error {
    std::size_t step_index;
    NumericalError(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
};

// A diagnostic was asked to run on data that cannot support it
// (e.g. a thinned trajectory that lost records inside the region of interest).
struct DataCompletenessError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ComparisonError : Error {
    using Error::Error;
};

}  // namespace spgd
