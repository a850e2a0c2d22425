#include "sarlab/scr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sarlab {

ScrReport image_scr(const Image& amplitude, const Mask& m_t, const Mask& m_c) {
    if (!amplitude.same_shape(m_t) || !amplitude.same_shape(m_c))
        throw ArgumentError("image_scr: mask shape mismatch");
    if (count_set(m_t) == 0) throw ArgumentError("image_scr: empty target mask");

    ScrReport rep;
    double peak = 0.0;
    double sum_c = 0.0;
    size_t n_c = 0;
    for (size_t i = 0; i < amplitude.size(); ++i) {
        if (m_t[i] != 0) peak = std::max(peak, static_cast<double>(amplitude[i]));
        if (m_c[i] != 0) {
            sum_c += amplitude[i];
            ++n_c;
        }
    }
    rep.target_peak = peak;
    rep.n_clutter = n_c;
    rep.clutter_mean = n_c == 0 ? 0.0 : sum_c / static_cast<double>(n_c);
    rep.value_db = rep.clutter_mean > 0.0
                       ? 20.0 * std::log10(rep.target_peak / rep.clutter_mean)
                       : std::numeric_limits<double>::infinity();
    return rep;
}

SarChip shift_scr(const SarChip& chip, double delta_db) {
    if (!chip.amplitude.same_shape(chip.target_mask) ||
        !chip.amplitude.same_shape(chip.shadow_mask))
        throw ArgumentError("shift_scr: chip masks do not match amplitude shape");

    const double gain = std::pow(10.0, -delta_db / 20.0);
    SarChip out = chip;
    bool clipped = false;
    for (size_t i = 0; i < out.amplitude.size(); ++i) {
        if (chip.target_mask[i] != 0 || chip.shadow_mask[i] != 0) continue;
        double v = static_cast<double>(chip.amplitude[i]) * gain;
        if (v > 1.0) {
            v = 1.0;
            clipped = true;
        }
        out.amplitude[i] = static_cast<float>(v);
    }
    out.clipped = chip.clipped || clipped;
    return out;
}

ScrSweep build_scr_sweep(const std::vector<SarChip>& chips, double range_db, double step_db) {
    if (step_db <= 0.0) throw ArgumentError("build_scr_sweep: step_db must be positive");
    double n_steps_f = range_db / step_db;
    int n_steps = static_cast<int>(std::lround(n_steps_f));
    if (std::abs(n_steps_f - n_steps) > 1e-9)
        throw ArgumentError("build_scr_sweep: step_db must divide range_db");

    ScrSweep sweep;
    for (int k = -n_steps; k <= n_steps; ++k) {
        double delta = k * step_db;
        sweep.deltas_db.push_back(delta);
        std::vector<SarChip> set;
        set.reserve(chips.size());
        for (const SarChip& c : chips)
            set.push_back(k == 0 ? c : shift_scr(c, delta));
        sweep.sets.push_back(std::move(set));
    }
    return sweep;
}

SarChip composite_clutter(const SarChip& chip, const Image& clutter_patch) {
    if (clutter_patch.width() < chip.amplitude.width() ||
        clutter_patch.height() < chip.amplitude.height())
        throw ArgumentError("composite_clutter: patch smaller than chip");

    SarChip out = chip;
    for (int y = 0; y < chip.amplitude.height(); ++y) {
        for (int x = 0; x < chip.amplitude.width(); ++x) {
            if (chip.target_mask.at(x, y) != 0 || chip.shadow_mask.at(x, y) != 0) continue;
            out.amplitude.at(x, y) = std::clamp(clutter_patch.at(x, y), 0.0f, 1.0f);
        }
    }
    out.composited = true;
    return out;
}

StageMasks downsample_masks(const Mask& m_t, const Mask& m_s, int feat_width, int feat_height) {
    if (!m_t.same_shape(m_s)) throw ArgumentError("downsample_masks: mask shape mismatch");
    if (feat_width <= 0 || feat_height <= 0 || m_t.width() % feat_width != 0 ||
        m_t.height() % feat_height != 0)
        throw ArgumentError("downsample_masks: feature size must evenly divide mask size");

    const int sx = m_t.width() / feat_width;
    const int sy = m_t.height() / feat_height;
    StageMasks out{Mask(feat_width, feat_height, 0), Mask(feat_width, feat_height, 0)};
    for (int fy = 0; fy < feat_height; ++fy) {
        for (int fx = 0; fx < feat_width; ++fx) {
            int n_t = 0, n_s = 0, n = sx * sy;
            for (int dy = 0; dy < sy; ++dy) {
                for (int dx = 0; dx < sx; ++dx) {
                    int x = fx * sx + dx, y = fy * sy + dy;
                    n_t += (m_t.at(x, y) != 0);
                    n_s += (m_s.at(x, y) != 0);
                }
            }
            if (2 * n_t >= n) {
                out.m_t.at(fx, fy) = 1;
            } else if (n_t == 0 && n_s == 0) {
                out.m_c.at(fx, fy) = 1;  // pure clutter box only
            }
            // otherwise: boundary or shadow cell, excluded from both masks
        }
    }
    return out;
}

double feature_scr(const FeatureMap& f, const Mask& m_t_ds, const Mask& m_c_ds) {
    if (m_t_ds.width() != f.width || m_t_ds.height() != f.height ||
        m_c_ds.width() != f.width || m_c_ds.height() != f.height)
        throw ArgumentError("feature_scr: mask size does not match feature map");
    if (count_set(m_t_ds) == 0) throw ArgumentError("feature_scr: empty target mask");

    double peak = -std::numeric_limits<double>::infinity();
    double sum_c = 0.0;
    size_t n_c = 0;
    for (int c = 0; c < f.channels; ++c) {
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                if (m_t_ds.at(x, y) != 0) peak = std::max(peak, static_cast<double>(f.at(c, x, y)));
                if (m_c_ds.at(x, y) != 0) {
                    sum_c += std::abs(f.at(c, x, y));
                    ++n_c;
                }
            }
        }
    }
    double mean_c = n_c == 0 ? 0.0 : sum_c / static_cast<double>(n_c);
    if (mean_c <= 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak / mean_c);
}

}  // namespace sarlab
