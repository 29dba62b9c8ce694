#pragma once

#include <stdexcept>
#include <string>

namespace exocast {

/// Invalid experiment or model configuration. Mapped to CLI exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data. Mapped to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical model failure (singular systems, failed optimization).
/// Mapped to CLI exit code 3.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace exocast
