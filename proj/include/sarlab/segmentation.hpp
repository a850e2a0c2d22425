#pragma once

#include "sarlab/grid.hpp"

namespace sarlab {

// Threshold-based target/shadow segmentation. Thresholds operate on the
// image rescaled to [0, 255].
struct SegParams {
    double min_target_intensity = 30.0;  // absolute floor, 0-255 scale
    double std_threshold = 50.0;         // percent of image std added on top
    double shadow_threshold = 0.33;      // fraction between image min and mean

    void validate() const;

    static SegParams synthetic() { return {30.0, 50.0, 0.33}; }
    static SegParams measured_like() { return {35.0, 50.0, 0.45}; }
};

struct SegResult {
    Mask m_t;
    Mask m_s;
    bool degenerate = false;  // no pixel passed the target threshold
};

// Bright connected components above an adaptive threshold become the target;
// dark pixels near the image minimum and adjacent to the target become the
// shadow; 3x3 open/close cleans both. Never throws on degenerate input.
SegResult segment(const Image& amplitude, const SegParams& params);

// Element-wise products selecting the masked region of an image.
Image apply_target_mask(const Image& img, const Mask& m_t);
Image apply_shadow_mask(const Image& img, const Mask& m_s);

// Binary morphology helpers (3x3 structuring element).
Mask morph_erode3(const Mask& m);
Mask morph_dilate3(const Mask& m);

double mask_iou(const Mask& a, const Mask& b);

}  // namespace sarlab
