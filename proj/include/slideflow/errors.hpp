#pragma once

#include <stdexcept>
#include <string>

namespace slideflow {

// Error taxonomy maps one-to-one onto CLI exit codes:
//   UsageError -> 1, DataError (and shape/contract breaches) -> 2, NumericError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad flags, unknown config keys, missing arguments.
struct UsageError : Error {
    using Error::Error;
};

// Unreadable/corrupt files, checksum or version mismatch, malformed slides.
struct DataError : Error {
    using Error::Error;
};

// Tensor dimension mismatch between producer and consumer.
struct ShapeError : DataError {
    using DataError::DataError;
};

// A documented precondition or invariant was violated by the caller.
struct ContractViolation : DataError {
    using DataError::DataError;
};

// NaN/Inf surfaced in a computation, divergence, non-finite gradients.
struct NumericError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

inline void require_shape(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

}  // namespace slideflow
