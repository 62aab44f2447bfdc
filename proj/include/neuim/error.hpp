#pragma once

#include <stdexcept>
#include <string>

namespace neuim {

/// Bad input: unknown preset, malformed file, inconsistent shapes. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown: singular inductances, non-finite states or losses. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace neuim
