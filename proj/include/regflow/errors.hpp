#pragma once

#include <stdexcept>
#include <string>

namespace regflow {

/// Bad arguments at call time: dimension mismatch, out-of-range parameter.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An object (set, function, operator, oracle) was described with degenerate data.
class ConstructionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of an otherwise well-posed numerical computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FitError : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateEstimateError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace regflow
