#pragma once

#include <stdexcept>
#include <string>

namespace exdeblur {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sizes that do not agree, or a kernel larger than its image.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Values that break a type invariant (non-finite data, bad kernel sum, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

/// Malformed or unsupported file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Input for which the requested quantity is undefined (constant image,
/// all-zero mask, zero-norm gradients).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// An iterative solver produced non-finite values.
class SolverDivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace exdeblur
