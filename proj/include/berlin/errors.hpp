#pragma once

#include <stdexcept>
#include <string>

namespace berlin {

// Dimension or argument mismatch between caller-supplied values.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical degeneracy: failed factorization, negative quadratic form, etc.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed binary or text input (IDX magic, truncated file, bad CSV cell).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad run configuration (missing fields, unknown names, absent files).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Semantically invalid data (empty dataset, label/feature count mismatch).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called on an object in a state that cannot serve it.
struct InvalidStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace berlin
