#pragma once

#include <stdexcept>
#include <string>

namespace gt {

/// Input or configuration that violates a documented contract.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Shape disagreement between tensors, models, datasets or environments.
class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A persisted artifact is missing, truncated or malformed.
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gt
