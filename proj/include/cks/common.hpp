#pragma once

#include <stdexcept>
#include <string>

namespace cks {

/// Bad command line arguments or API misuse. CLI exit code 2.
class ArgError : public std::runtime_error {
public:
    explicit ArgError(const std::string& what) : std::runtime_error(what) {}
};

/// Missing, malformed or inconsistent input data. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure (NaN loss, divergence). CLI exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cks
