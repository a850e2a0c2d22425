#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "sarlab/common.hpp"

namespace sarlab::nn {

// Dense tensor shape, batch-major: B x C x H x W (unused trailing dims = 1).
// Weights reuse the same struct: conv kernels are Cout x Cin x Kh x Kw,
// linear weights Out x In x 1 x 1.
struct Shape4 {
    int b = 1, c = 1, h = 1, w = 1;

    size_t count() const {
        return static_cast<size_t>(b) * c * static_cast<size_t>(h) * w;
    }
    bool operator==(const Shape4&) const = default;

    std::string str() const {
        return std::to_string(b) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
               std::to_string(w);
    }
};

inline void require_same_shape(const Shape4& a, const Shape4& b, const char* op) {
    if (!(a == b))
        throw ContractError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
}

}  // namespace sarlab::nn
