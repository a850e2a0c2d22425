#include "sarlab/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace sarlab {

void SegParams::validate() const {
    if (min_target_intensity <= 0.0 || std_threshold <= 0.0 || shadow_threshold <= 0.0)
        throw ArgumentError("SegParams: all thresholds must be positive");
    if (shadow_threshold >= 1.0)
        throw ArgumentError("SegParams: shadow_threshold must be in (0,1)");
}

namespace {

Mask morph3(const Mask& m, bool erode) {
    Mask out(m.width(), m.height(), 0);
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            bool all = true, any = false;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int xx = x + dx, yy = y + dy;
                    bool v = m.in_bounds(xx, yy) && m.at(xx, yy) != 0;
                    all &= v;
                    any |= v;
                }
            }
            out.at(x, y) = (erode ? all : any) ? 1 : 0;
        }
    }
    return out;
}

// 4-connected component labelling; returns label grid and component sizes.
std::vector<size_t> label_components(const Mask& m, std::vector<int>& labels) {
    labels.assign(m.size(), -1);
    std::vector<size_t> sizes;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            size_t idx = static_cast<size_t>(y) * m.width() + x;
            if (m[idx] == 0 || labels[idx] >= 0) continue;
            int label = static_cast<int>(sizes.size());
            size_t count = 0;
            std::queue<std::pair<int, int>> q;
            q.push({x, y});
            labels[idx] = label;
            while (!q.empty()) {
                auto [cx, cy] = q.front();
                q.pop();
                ++count;
                const int nx[4] = {cx - 1, cx + 1, cx, cx};
                const int ny[4] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (!m.in_bounds(nx[k], ny[k])) continue;
                    size_t ni = static_cast<size_t>(ny[k]) * m.width() + nx[k];
                    if (m[ni] != 0 && labels[ni] < 0) {
                        labels[ni] = label;
                        q.push({nx[k], ny[k]});
                    }
                }
            }
            sizes.push_back(count);
        }
    }
    return sizes;
}

}  // namespace

Mask morph_erode3(const Mask& m) { return morph3(m, true); }
Mask morph_dilate3(const Mask& m) { return morph3(m, false); }

SegResult segment(const Image& amplitude, const SegParams& params) {
    params.validate();
    SegResult res{Mask(amplitude.width(), amplitude.height(), 0),
                  Mask(amplitude.width(), amplitude.height(), 0), false};

    float vmin = amplitude[0], vmax = amplitude[0];
    for (size_t i = 0; i < amplitude.size(); ++i) {
        vmin = std::min(vmin, amplitude[i]);
        vmax = std::max(vmax, amplitude[i]);
    }
    if (vmax - vmin < 1e-9f) {
        res.degenerate = true;  // flat image, nothing to segment
        return res;
    }

    // Rescale to [0, 255] and collect stats.
    std::vector<double> r(amplitude.size());
    double mean = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        r[i] = 255.0 * (amplitude[i] - vmin) / (vmax - vmin);
        mean += r[i];
    }
    mean /= static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    double stddev = std::sqrt(var / static_cast<double>(r.size()));

    // Target: bright pixels above mean + scaled std, never below the absolute
    // floor. std_threshold is a percentage of the image std.
    const double t_target =
        std::max(params.min_target_intensity, mean + params.std_threshold / 100.0 * stddev);
    Mask cand(amplitude.width(), amplitude.height(), 0);
    for (size_t i = 0; i < r.size(); ++i) cand[i] = r[i] > t_target ? 1 : 0;
    cand = morph_dilate3(morph_erode3(cand));   // open
    cand = morph_erode3(morph_dilate3(cand));   // close

    if (count_set(cand) == 0) {
        res.degenerate = true;
        return res;
    }
    res.m_t = cand;

    // Shadow: dark pixels near the image minimum, kept only when the
    // component touches the (dilated) target.
    const double t_shadow = params.shadow_threshold * mean;
    Mask shadow_cand(amplitude.width(), amplitude.height(), 0);
    for (size_t i = 0; i < r.size(); ++i)
        shadow_cand[i] = (r[i] < t_shadow && res.m_t[i] == 0) ? 1 : 0;
    shadow_cand = morph_dilate3(morph_erode3(shadow_cand));
    shadow_cand = morph_erode3(morph_dilate3(shadow_cand));

    Mask near_target = morph_dilate3(morph_dilate3(res.m_t));
    std::vector<int> labels;
    std::vector<size_t> sizes = label_components(shadow_cand, labels);
    std::vector<uint8_t> keep(sizes.size(), 0);
    for (size_t i = 0; i < shadow_cand.size(); ++i)
        if (labels[i] >= 0 && near_target[i] != 0) keep[labels[i]] = 1;
    for (size_t i = 0; i < shadow_cand.size(); ++i)
        if (labels[i] >= 0 && keep[labels[i]] && res.m_t[i] == 0) res.m_s[i] = 1;

    return res;
}

Image apply_target_mask(const Image& img, const Mask& m_t) {
    if (!img.same_shape(m_t)) throw ArgumentError("apply_target_mask: shape mismatch");
    Image out(img.width(), img.height());
    for (size_t i = 0; i < img.size(); ++i) out[i] = m_t[i] != 0 ? img[i] : 0.0f;
    return out;
}

Image apply_shadow_mask(const Image& img, const Mask& m_s) {
    if (!img.same_shape(m_s)) throw ArgumentError("apply_shadow_mask: shape mismatch");
    Image out(img.width(), img.height());
    for (size_t i = 0; i < img.size(); ++i) out[i] = m_s[i] != 0 ? img[i] : 0.0f;
    return out;
}

double mask_iou(const Mask& a, const Mask& b) {
    if (!a.same_shape(b)) throw ArgumentError("mask_iou: shape mismatch");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        bool va = a[i] != 0, vb = b[i] != 0;
        inter += (va && vb);
        uni += (va || vb);
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace sarlab
