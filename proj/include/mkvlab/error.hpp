#pragma once

#include <stdexcept>
#include <string>

namespace mkvlab {

/// Invalid input to a library operation (shape mismatch, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure that the caller must see (non-finite quadrature, bracketing failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration/schema error carrying the offending JSON path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace mkvlab
