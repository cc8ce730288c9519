#pragma once

#include <stdexcept>
#include <string>

namespace mhd {

// Shape/dimension mismatch between tensors participating in an operation.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid value (non-binary mask, non-normalized coefficients, bad hyperparameter).
struct ValueError : std::runtime_error {
    explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

// Guard against combinatorial explosion (mask enumeration).
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad experiment configuration (unknown keys, missing fields, out-of-range values).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mhd
