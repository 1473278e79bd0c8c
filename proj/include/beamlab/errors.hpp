#pragma once

#include <stdexcept>
#include <string>

namespace beamlab {

// Raised when an integration, quadrature or linear solve cannot produce a
// usable result. The message carries the diagnostic written by the CLI.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class AssumptionError : public std::runtime_error {
public:
    explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace beamlab
