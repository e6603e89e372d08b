#pragma once

#include <stdexcept>
#include <string>

namespace depnn {

/// Malformed or inconsistent input data. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numeric failures (non-finite loss, shape mismatch, zero vectors). Exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public DataError {
public:
    FormatError(const std::string& what, std::size_t line)
        : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit FormatError(const std::string& what) : DataError(what), line_(0) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class TreeViolation : public DataError {
public:
    using DataError::DataError;
};

class InvalidSpan : public DataError {
public:
    using DataError::DataError;
};

class Disconnected : public DataError {
public:
    using DataError::DataError;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class EmptyPath : public DataError {
public:
    using DataError::DataError;
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class MissingEmbedding : public DataError {
public:
    using DataError::DataError;
};

class ShapeMismatch : public NumericError {
public:
    using NumericError::NumericError;
};

class NonFiniteLoss : public NumericError {
public:
    using NumericError::NumericError;
};

class ZeroVector : public NumericError {
public:
    using NumericError::NumericError;
};

class InvalidWindowSize : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace depnn
