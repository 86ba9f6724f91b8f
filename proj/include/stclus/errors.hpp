#pragma once

#include <stdexcept>
#include <string>

namespace stclus {

/// Invalid user configuration (bad flags, out-of-range parameters). Exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unusable input data. Exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A track that collapses below two samples during preprocessing.
class DegenerateTrack : public DataError {
public:
    explicit DegenerateTrack(const std::string& msg) : DataError(msg) {}
};

}  // namespace stclus
