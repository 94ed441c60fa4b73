#pragma once

#include <stdexcept>
#include <string>

namespace guider {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter set (bad ranges, unknown keys, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (dimension mismatches, bad logs, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Filesystem / codec failures.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace guider
