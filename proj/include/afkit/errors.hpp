#pragma once

#include <stdexcept>
#include <string>

namespace afkit {

// Error taxonomy. The CLI maps categories to exit codes
// (config -> 2, data -> 3, training -> 4), so new error types should
// derive from the right branch.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration: unknown keys, impossible ranges, empty search spaces.
struct ConfigError : Error {
    using Error::Error;
};

// Unknown architecture name.
struct SpecError : ConfigError {
    using ConfigError::ConfigError;
};

// Anything wrong with input files or byte streams.
struct DataError : Error {
    using Error::Error;
};

struct ParseError : DataError {
    using DataError::DataError;
};

struct TruncationError : DataError {
    using DataError::DataError;
};

struct UnsupportedFormat : DataError {
    using DataError::DataError;
};

struct VersionError : DataError {
    using DataError::DataError;
};

// Sample does not fit the target signal format.
struct RangeError : DataError {
    using DataError::DataError;
};

struct LengthError : DataError {
    using DataError::DataError;
};

// Not enough windows of a class to balance a dataset.
struct ClassShortage : DataError {
    using DataError::DataError;
};

// Record too short for the requested analysis.
struct InsufficientSignal : DataError {
    using DataError::DataError;
};

// Signal with no energy where energy is required (SNR calibration, metrics).
struct ZeroPowerError : Error {
    using Error::Error;
};

// Tensor/layer shape disagreement.
struct ShapeError : Error {
    using Error::Error;
};

// API called out of order (e.g. backward before forward).
struct StateError : Error {
    using Error::Error;
};

// Training produced a non-finite loss.
struct DivergenceFault : Error {
    using Error::Error;
};

}  // namespace afkit
