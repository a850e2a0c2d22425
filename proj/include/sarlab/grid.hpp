#pragma once

#include <cstdint>
#include <vector>

#include "sarlab/common.hpp"

namespace sarlab {

// Row-major 2-D grid. Image = float amplitudes in [0,1]; Mask = {0,1} bytes.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw ArgumentError("Grid: dimensions must be positive");
        data_.assign(static_cast<size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
    const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
    T& operator[](size_t i) { return data_[i]; }
    const T& operator[](size_t i) const { return data_[i]; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& pixels() { return data_; }
    const std::vector<T>& pixels() const { return data_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Image = Grid<float>;
using Mask = Grid<uint8_t>;

inline size_t count_set(const Mask& m) {
    size_t n = 0;
    for (size_t i = 0; i < m.size(); ++i) n += (m[i] != 0);
    return n;
}

inline bool masks_disjoint(const Mask& a, const Mask& b) {
    if (!a.same_shape(b)) throw ArgumentError("masks_disjoint: shape mismatch");
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0 && b[i] != 0) return false;
    return true;
}

// Clutter = everything that is neither target nor shadow.
inline Mask clutter_mask(const Mask& m_t, const Mask& m_s) {
    if (!m_t.same_shape(m_s)) throw ArgumentError("clutter_mask: shape mismatch");
    Mask m_c(m_t.width(), m_t.height(), 0);
    for (size_t i = 0; i < m_c.size(); ++i)
        m_c[i] = (m_t[i] == 0 && m_s[i] == 0) ? 1 : 0;
    return m_c;
}

// Mean amplitude over set mask pixels; 0 when the mask is empty.
inline double masked_mean(const Image& img, const Mask& m) {
    if (!img.same_shape(m)) throw ArgumentError("masked_mean: shape mismatch");
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < img.size(); ++i) {
        if (m[i] != 0) {
            sum += img[i];
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace sarlab
