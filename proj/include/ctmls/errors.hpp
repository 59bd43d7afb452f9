#pragma once

#include <stdexcept>
#include <string>

namespace ctmls {

// Bad user-supplied configuration (flags, config file, parameter ranges).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad input data (missing files, malformed images, inconsistent tables).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ctmls
