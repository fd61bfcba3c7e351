#pragma once

#include <stdexcept>
#include <string>

namespace rainrisk {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad inputs: malformed files, schema violations, invalid arguments,
/// impossible alignments. CLI exit code 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Estimation problems: optimizer non-convergence, numerical overflow,
/// degenerate regression designs. CLI exit code 3.
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what) {}
};

/// Filesystem problems while reading or writing bundles. CLI exit code 4.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace rainrisk
