#pragma once

#include <stdexcept>
#include <string>

namespace plab {

// Error taxonomy mirrors the CLI exit codes: usage errors exit 1,
// configuration/format errors exit 2, anything else at runtime exits 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: violated preconditions, dimension mismatches.
struct UsageError : Error {
    using Error::Error;
};

// Invalid configuration: bad config values, missing files, malformed tasks.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed on-disk data (weight files, clip directories).
struct FormatError : ConfigError {
    using ConfigError::ConfigError;
};

// Data that is structurally valid but unusable (wrong resolution, too short).
struct InputError : Error {
    using Error::Error;
};

// Optimization diverged; carries the epoch at which it happened.
struct TrainingError : Error {
    int epoch;
    TrainingError(const std::string& msg, int ep) : Error(msg), epoch(ep) {}
};

} // namespace plab
