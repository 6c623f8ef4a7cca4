#pragma once

#include <stdexcept>
#include <string>

namespace fer {

/// Bad input data or configuration: malformed files, dimension mismatches,
/// out-of-range parameters. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside an otherwise valid computation, e.g. an
/// eigensolver that does not converge. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fer
