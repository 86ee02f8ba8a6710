#pragma once

#include <stdexcept>
#include <string>

namespace mma {

// Base for all library errors. Subclasses map onto CLI exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor shapes or axis arguments.
struct DimensionError : Error {
    using Error::Error;
};

// A stated precondition of an operation was violated.
struct ContractError : Error {
    using Error::Error;
};

// Softmax/attention over a fully masked group, or an empty/degenerate input.
struct DegenerateInputError : Error {
    using Error::Error;
};

// Class index outside the label alphabet.
struct LabelError : Error {
    using Error::Error;
};

// Non-finite value where a finite one is required (e.g. NaN gradient).
struct NumericalError : Error {
    using Error::Error;
};

// A record violates a data-model invariant.
struct ValidationError : Error {
    using Error::Error;
};

// Malformed input file; message carries line/byte position.
struct ParseError : Error {
    using Error::Error;
};

// Infeasible or inconsistent synthesis spec.
struct SpecError : Error {
    using Error::Error;
};

// Not enough examples of some class to satisfy a stratified split.
struct StratificationError : Error {
    using Error::Error;
};

// Too few examples per class to fit a classifier.
struct DataError : Error {
    using Error::Error;
};

// Checkpoint and runtime configuration disagree.
struct CheckpointMismatchError : Error {
    using Error::Error;
};

}  // namespace mma
