#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sarlab/grid.hpp"

namespace sarlab {

constexpr int kNumClasses = 10;

enum class Domain { Syn, Aug, MeaLike };

const char* to_string(Domain d);
Domain domain_from_string(const std::string& s);

// Integer domain tag fed to the domain discriminator: Syn=1, Aug=2, MeaLike=3.
int domain_tag(Domain d);

// Imaging + geometry parameters for one chip. Everything random about a chip
// derives from `seed`, so rendering is a pure function of the spec.
struct ChipSpec {
    int width = 64;
    int height = 64;
    int class_id = 0;                    // [0, kNumClasses)
    double azimuth_deg = 0.0;            // [0, 360)
    double depression_deg = 15.0;        // [14, 17]
    double target_reflectivity = 0.85;   // (0, 1]
    int clutter_texture_id = 0;
    int speckle_looks = 4;               // >= 1
    uint64_t seed = 0;

    void validate() const;
};

// One amplitude chip with exact ground-truth region masks.
struct SarChip {
    Image amplitude;        // [0,1]
    Mask target_mask;       // m_t
    Mask shadow_mask;       // m_s, disjoint from m_t
    int label = 0;
    Domain domain = Domain::Syn;
    ChipSpec spec;
    bool clipped = false;       // clutter hit the [0,1] ceiling during an SCR shift
    bool composited = false;    // clutter replaced by an external patch
    bool aug_fallback = false;  // augmentation used global scaling (mixture fit failed)
};

using Corpus = std::vector<SarChip>;

// Clutter texture registry.
//   ids 0..3     smooth isotropic ground returns (training pool)
//   ids 10..11   anisotropic fields (measured-like pool)
//   ids 100..101 structured blobs + linear streaks (unknown-clutter pool)
bool texture_id_known(int texture_id);
std::vector<int> texture_pool_train();
std::vector<int> texture_pool_measured_like();
std::vector<int> texture_pool_unknown();

// Deterministic clutter patch of the requested size.
Image make_clutter_patch(int texture_id, int width, int height, uint64_t seed);

// Multiplicative L-look speckle: each pixel scaled by an i.i.d.
// Gamma(shape=looks, scale=1/looks) factor (unit mean), then clipped to [0,1].
Image add_speckle(const Image& amplitude, int looks, uint64_t seed);

// Renders target hull + scatterers, projected shadow, textured clutter and
// speckle. Deterministic for a fixed spec.
SarChip render_chip(const ChipSpec& spec);

}  // namespace sarlab
