#pragma once

#include <stdexcept>
#include <string>

namespace fracflow {

// Failures of the Laplace-space model at a particular parameter set / u.
// Domain errors on plain inputs use std::domain_error.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RootClassificationError : public ModelError {
public:
    using ModelError::ModelError;
};

class NullSpaceError : public ModelError {
public:
    using ModelError::ModelError;
};

class SingularBoundaryError : public ModelError {
public:
    using ModelError::ModelError;
};

class ConsistencyError : public ModelError {
public:
    using ModelError::ModelError;
};

// Raised by the inversion layer; wraps the evaluator failure (nested) and
// names the sample point that triggered it.
class EvaluationError : public ModelError {
public:
    using ModelError::ModelError;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fracflow
