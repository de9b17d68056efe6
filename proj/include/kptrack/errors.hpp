#pragma once

#include <stdexcept>
#include <string>

namespace kptrack {

// Bad input data or configuration: wrong shapes, missing thresholds,
// non-finite values, malformed files. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures: missing or unwritable paths. CLI maps this to exit code 1.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kptrack
