#pragma once

#include <stdexcept>
#include <string>

namespace sarlab {

// Invalid runtime argument: shape mismatch, empty mask, out-of-range value.
struct ArgumentError : std::runtime_error {
    explicit ArgumentError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration: unknown class/texture id, incompatible checkpoint, stride mismatch.
struct ConfigurationError : std::runtime_error {
    explicit ConfigurationError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: training-mode call without masks, eval on an unloaded model.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem/serialization failure, including corrupt or truncated files.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sarlab
