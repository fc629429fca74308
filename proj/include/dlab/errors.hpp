#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

/// Violated precondition of an operation (bad argument, wrong call order).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Tensor shapes that do not fit the requested operation.
class DimensionError : public ContractError {
public:
    using ContractError::ContractError;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed file content (dataset, checkpoint, results table).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A data item that parsed but breaks a dataset invariant.
class ValidationError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Attempt to train on benchmark-test data outside the placement phase,
/// or to evaluate leakage on a dataset that is not a benchmark.
class ContaminationGuardError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Synthetic generation could not satisfy its constraints.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dlab
