#pragma once

#include <stdexcept>
#include <string>

namespace deepts {

/// Tensor shape disagreement (matmul inner dims, layer input dims, ...).
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// NaN/Inf escaped a numeric operation.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Contract violation on an argument value (negative lambda, rate >= 1, ...).
class ValueError : public std::runtime_error {
public:
    explicit ValueError(const std::string& what) : std::runtime_error(what) {}
};

/// A backward call with a stale, mismatched or already-consumed cache.
class CacheError : public std::runtime_error {
public:
    explicit CacheError(const std::string& what) : std::runtime_error(what) {}
};

/// File/ingestion problems: missing file, bad header, malformed schema.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid run configuration (unknown key, bad value, missing field).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Training diverged or failed at runtime (non-finite loss, ...).
class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace deepts
