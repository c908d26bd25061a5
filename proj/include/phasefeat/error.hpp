#pragma once

#include <stdexcept>
#include <string>

namespace phasefeat {

// Bad input data: unreadable files, malformed rows, violated preconditions on
// signals or cohorts. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration values or unknown keys. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace phasefeat
