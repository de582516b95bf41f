#pragma once

#include <stdexcept>
#include <string>

namespace nuctrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image dimensions are zero or do not agree between inputs.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A caller-supplied argument violates an operation's precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// Internal bookkeeping disagrees with itself (e.g. a label that is not in the map).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// A mean was requested over an empty mask.
class MeasurementError : public Error {
public:
    using Error::Error;
};

/// Synthetic scene description is invalid.
class SpecError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace nuctrack
