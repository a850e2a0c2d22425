#pragma once

#include <vector>

#include "sarlab/scene.hpp"

namespace sarlab {

// Image-level signal-to-clutter ratio: 20*log10(peak target / mean clutter).
// value_db is +inf when the clutter mean is zero (fully masked image).
struct ScrReport {
    double value_db = 0.0;
    double target_peak = 0.0;
    double clutter_mean = 0.0;
    size_t n_clutter = 0;
};

ScrReport image_scr(const Image& amplitude, const Mask& m_t, const Mask& m_c);

// Shifts the chip's SCR by delta_db by scaling clutter pixels (neither target
// nor shadow) with the uniform gain 10^(-delta/20). Target and shadow pixels
// are untouched. Sets chip.clipped if any clutter pixel saturates at 1.
SarChip shift_scr(const SarChip& chip, double delta_db);

// 13 sets for the default [-3, +3] / 0.5 dB sweep; the 0 dB entry is the
// unmodified corpus.
struct ScrSweep {
    std::vector<double> deltas_db;
    std::vector<std::vector<SarChip>> sets;  // parallel to deltas_db
};

ScrSweep build_scr_sweep(const std::vector<SarChip>& chips, double range_db = 3.0,
                         double step_db = 0.5);

// Replaces clutter pixels with patch values; target/shadow pixels and all
// masks are preserved exactly. The patch must be at least chip-sized.
SarChip composite_clutter(const SarChip& chip, const Image& clutter_patch);

// Activation tensor for one sample, channel-major (c, y, x).
struct FeatureMap {
    int channels = 0;
    int width = 0;
    int height = 0;
    int stage = 0;
    std::vector<float> data;  // size channels*width*height

    float at(int c, int x, int y) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    float& at(int c, int x, int y) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
};

// Region masks at a feature stage's resolution. Cells whose receptive box is
// pure clutter go to m_c; cells mostly covered by target go to m_t; boundary
// cells that would land in clutter are excluded from both.
struct StageMasks {
    Mask m_t;
    Mask m_c;
};

StageMasks downsample_masks(const Mask& m_t, const Mask& m_s, int feat_width, int feat_height);

// Feature-level SCR: max activation over target cells (all channels) against
// mean |activation| over clutter cells. +inf when the clutter term is zero.
double feature_scr(const FeatureMap& f, const Mask& m_t_ds, const Mask& m_c_ds);

}  // namespace sarlab
