#pragma once

#include <stdexcept>
#include <string>

namespace penn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or layer shapes that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Out-of-range hyperparameter or argument value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input record or file does not match the fixed 18-input/2-output schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A target value violates the prediction/loss policy (e.g. zero target under MARE).
class PolicyError : public Error {
public:
    using Error::Error;
};

/// Normalization statistics could not be formed (constant feature, empty split).
class StatsError : public Error {
public:
    using Error::Error;
};

/// Caller broke an API precondition (non-scalar backward root, mismatched checkpoint).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration file or unknown key.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& what, int epoch, int batch)
        : Error(what), epoch_(epoch), batch_(batch) {}
    int epoch() const noexcept { return epoch_; }
    int batch() const noexcept { return batch_; }

private:
    int epoch_;
    int batch_;
};

}  // namespace penn
