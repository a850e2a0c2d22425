#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sarlab {

// All randomness in the library flows from explicit 64-bit seeds. Child
// streams are derived with splitmix64 so that per-chip / per-layer / per-step
// generators are independent of each other and of evaluation order.
inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
    uint64_t s = root;
    splitmix64_next(s);
    s ^= 0xd1b54a32d192ed03ULL * (stream + 1);
    splitmix64_next(s);
    return splitmix64_next(s);
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream_a, uint64_t stream_b) {
    return derive_seed(derive_seed(root, stream_a), stream_b);
}

// Named streams (layer initialisation etc.): FNV-1a over the name.
inline uint64_t derive_seed(uint64_t root, std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return derive_seed(root, h);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double uniform01() { return uniform(0.0, 1.0); }
    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    double gamma(double shape, double scale) {
        return std::gamma_distribution<double>(shape, scale)(engine_);
    }
    // Inclusive bounds.
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }
    uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace sarlab
