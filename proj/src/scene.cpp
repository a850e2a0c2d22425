#include "sarlab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sarlab/rng.hpp"

namespace sarlab {

const char* to_string(Domain d) {
    switch (d) {
        case Domain::Syn: return "Syn";
        case Domain::Aug: return "Aug";
        case Domain::MeaLike: return "MeaLike";
    }
    return "Syn";
}

Domain domain_from_string(const std::string& s) {
    if (s == "Syn") return Domain::Syn;
    if (s == "Aug") return Domain::Aug;
    if (s == "MeaLike") return Domain::MeaLike;
    throw ArgumentError("unknown domain tag: " + s);
}

int domain_tag(Domain d) {
    switch (d) {
        case Domain::Syn: return 1;
        case Domain::Aug: return 2;
        case Domain::MeaLike: return 3;
    }
    return 1;
}

void ChipSpec::validate() const {
    if (width <= 0 || height <= 0)
        throw ArgumentError("ChipSpec: width and height must be positive");
    if (class_id < 0 || class_id >= kNumClasses)
        throw ConfigurationError("ChipSpec: unknown class_id " + std::to_string(class_id));
    if (!(target_reflectivity > 0.0 && target_reflectivity <= 1.0))
        throw ArgumentError("ChipSpec: target_reflectivity must be in (0,1]");
    if (depression_deg < 14.0 || depression_deg > 17.0)
        throw ArgumentError("ChipSpec: depression_deg must be in [14,17]");
    if (speckle_looks < 1)
        throw ArgumentError("ChipSpec: speckle_looks must be >= 1");
    if (!texture_id_known(clutter_texture_id))
        throw ConfigurationError("ChipSpec: unknown clutter_texture_id " +
                                 std::to_string(clutter_texture_id));
}

// ---------------------------------------------------------------------------
// Clutter textures
// ---------------------------------------------------------------------------

namespace {

struct Vec2 {
    double x, y;
};

// Iterated box blur with separate x/y radii; two passes approximate a
// Gaussian with correlation length ~radius.
void box_blur(std::vector<double>& v, int w, int h, int rx, int ry) {
    if (rx > 0) {
        std::vector<double> tmp(v.size());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                int n = 0;
                for (int dx = -rx; dx <= rx; ++dx) {
                    int xx = x + dx;
                    if (xx < 0 || xx >= w) continue;
                    s += v[static_cast<size_t>(y) * w + xx];
                    ++n;
                }
                tmp[static_cast<size_t>(y) * w + x] = s / n;
            }
        }
        v.swap(tmp);
    }
    if (ry > 0) {
        std::vector<double> tmp(v.size());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                int n = 0;
                for (int dy = -ry; dy <= ry; ++dy) {
                    int yy = y + dy;
                    if (yy < 0 || yy >= h) continue;
                    s += v[static_cast<size_t>(yy) * w + x];
                    ++n;
                }
                tmp[static_cast<size_t>(y) * w + x] = s / n;
            }
        }
        v.swap(tmp);
    }
}

// Rescale to the requested mean / relative std, then clamp.
void normalize_field(std::vector<double>& v, double mean, double rel_std) {
    double mu = 0.0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mu) * (x - mu);
    double sd = std::sqrt(var / static_cast<double>(v.size()));
    double gain = sd > 1e-12 ? mean * rel_std / sd : 0.0;
    for (double& x : v) x = std::clamp(mean + (x - mu) * gain, 0.02, 0.95);
}

Image field_to_image(const std::vector<double>& v, int w, int h) {
    Image img(w, h);
    for (size_t i = 0; i < v.size(); ++i) img[i] = static_cast<float>(v[i]);
    return img;
}

Image smooth_field(int w, int h, uint64_t seed, int rx, int ry, double mean, double rel_std) {
    Rng rng(seed);
    std::vector<double> v(static_cast<size_t>(w) * h);
    for (double& x : v) x = rng.uniform01();
    box_blur(v, w, h, rx, ry);
    box_blur(v, w, h, rx, ry);
    normalize_field(v, mean, rel_std);
    return field_to_image(v, w, h);
}

void draw_blob(std::vector<double>& v, int w, int h, double cx, double cy, double sigma,
               double amp) {
    int r = static_cast<int>(std::ceil(3.0 * sigma));
    int x0 = std::max(0, static_cast<int>(cx) - r), x1 = std::min(w - 1, static_cast<int>(cx) + r);
    int y0 = std::max(0, static_cast<int>(cy) - r), y1 = std::min(h - 1, static_cast<int>(cy) + r);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            v[static_cast<size_t>(y) * w + x] += amp * std::exp(-d2 / (2.0 * sigma * sigma));
        }
    }
}

void draw_streak(std::vector<double>& v, int w, int h, double angle, double offset,
                 double thickness, double amp) {
    double nx = std::cos(angle), ny = std::sin(angle);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double d = std::abs(nx * (x - w / 2.0) + ny * (y - h / 2.0) - offset);
            if (d < 3.0 * thickness)
                v[static_cast<size_t>(y) * w + x] +=
                    amp * std::exp(-d * d / (2.0 * thickness * thickness));
        }
    }
}

// Structured clutter: bumpy background with bright blobs and streaks. Used as
// the held-out family that never appears in training pools.
Image structured_field(int w, int h, uint64_t seed, bool streak_heavy) {
    Rng rng(seed);
    std::vector<double> v(static_cast<size_t>(w) * h);
    for (double& x : v) x = rng.uniform01();
    box_blur(v, w, h, 2, 2);
    normalize_field(v, 0.15, 0.3);

    int n_blobs = streak_heavy ? 3 : 7;
    int n_streaks = streak_heavy ? 4 : 1;
    for (int i = 0; i < n_blobs; ++i) {
        draw_blob(v, w, h, rng.uniform(0, w), rng.uniform(0, h), rng.uniform(2.5, 6.0),
                  rng.uniform(0.25, 0.55));
    }
    for (int i = 0; i < n_streaks; ++i) {
        draw_streak(v, w, h, rng.uniform(0.0, std::numbers::pi), rng.uniform(-0.4 * w, 0.4 * w),
                    rng.uniform(1.0, 2.0), rng.uniform(0.3, 0.6));
    }
    for (double& x : v) x = std::clamp(x, 0.02, 0.95);
    return field_to_image(v, w, h);
}

}  // namespace

bool texture_id_known(int id) {
    return (id >= 0 && id <= 3) || id == 10 || id == 11 || id == 100 || id == 101;
}

std::vector<int> texture_pool_train() { return {0, 1, 2, 3}; }
std::vector<int> texture_pool_measured_like() { return {10, 11}; }
std::vector<int> texture_pool_unknown() { return {100, 101}; }

Image make_clutter_patch(int texture_id, int width, int height, uint64_t seed) {
    if (width <= 0 || height <= 0)
        throw ArgumentError("make_clutter_patch: dimensions must be positive");
    switch (texture_id) {
        case 0: return smooth_field(width, height, seed, 1, 1, 0.18, 0.25);
        case 1: return smooth_field(width, height, seed, 2, 2, 0.18, 0.25);
        case 2: return smooth_field(width, height, seed, 3, 3, 0.20, 0.25);
        case 3: return smooth_field(width, height, seed, 5, 5, 0.18, 0.30);
        case 10: return smooth_field(width, height, seed, 6, 1, 0.18, 0.35);
        case 11: return smooth_field(width, height, seed, 1, 6, 0.20, 0.35);
        case 100: return structured_field(width, height, seed, false);
        case 101: return structured_field(width, height, seed, true);
        default:
            throw ConfigurationError("unknown clutter_texture_id " + std::to_string(texture_id));
    }
}

// ---------------------------------------------------------------------------
// Speckle
// ---------------------------------------------------------------------------

Image add_speckle(const Image& amplitude, int looks, uint64_t seed) {
    if (looks < 1) throw ArgumentError("add_speckle: looks must be >= 1");
    Rng rng(seed);
    Image out(amplitude.width(), amplitude.height());
    const double shape = static_cast<double>(looks);
    const double scale = 1.0 / shape;
    for (size_t i = 0; i < amplitude.size(); ++i) {
        double k = rng.gamma(shape, scale);
        out[i] = static_cast<float>(std::clamp(static_cast<double>(amplitude[i]) * k, 0.0, 1.0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Target archetypes
// ---------------------------------------------------------------------------

namespace {

struct Scatterer {
    double u, v;       // unit-space position inside the hull
    double intensity;  // relative brightness
};

struct Archetype {
    std::vector<Vec2> hull;  // unit-space polygon, |coord| <= 1
    std::vector<Scatterer> scatterers;
};

// Ten hand-drawn convex/concave hulls with distinct scatterer layouts; the
// contour + dot pattern is what makes classes separable.
const std::vector<Archetype>& archetypes() {
    static const std::vector<Archetype> table = {
        // 0: wide slab
        {{{-1.0, -0.45}, {1.0, -0.45}, {1.0, 0.45}, {-1.0, 0.45}},
         {{-0.6, 0.0, 1.0}, {0.0, 0.15, 0.8}, {0.65, -0.1, 0.9}}},
        // 1: pentagon
        {{{-0.8, -0.7}, {0.8, -0.7}, {0.8, 0.3}, {0.0, 0.9}, {-0.8, 0.3}},
         {{0.0, -0.3, 1.0}, {-0.45, 0.1, 0.7}, {0.45, 0.1, 0.7}, {0.0, 0.5, 0.9}}},
        // 2: L
        {{{-0.9, -0.9}, {0.9, -0.9}, {0.9, -0.1}, {0.1, -0.1}, {0.1, 0.9}, {-0.9, 0.9}},
         {{-0.5, -0.5, 1.0}, {0.5, -0.5, 0.8}, {-0.4, 0.5, 0.9}}},
        // 3: T
        {{{-1.0, -0.9}, {1.0, -0.9}, {1.0, -0.2}, {0.35, -0.2}, {0.35, 0.9},
          {-0.35, 0.9}, {-0.35, -0.2}, {-1.0, -0.2}},
         {{-0.7, -0.55, 0.9}, {0.7, -0.55, 0.9}, {0.0, 0.4, 1.0}}},
        // 4: elongated hexagon
        {{{-1.0, 0.0}, {-0.6, -0.55}, {0.6, -0.55}, {1.0, 0.0}, {0.6, 0.55}, {-0.6, 0.55}},
         {{-0.65, 0.0, 0.9}, {0.0, 0.0, 1.0}, {0.65, 0.0, 0.9}, {0.0, -0.35, 0.6}}},
        // 5: diamond
        {{{0.0, -1.0}, {0.65, 0.0}, {0.0, 1.0}, {-0.65, 0.0}},
         {{0.0, -0.5, 1.0}, {0.0, 0.5, 1.0}, {0.0, 0.0, 0.6}}},
        // 6: U
        {{{-0.9, -0.9}, {-0.3, -0.9}, {-0.3, 0.35}, {0.3, 0.35}, {0.3, -0.9},
          {0.9, -0.9}, {0.9, 0.9}, {-0.9, 0.9}},
         {{-0.6, -0.5, 1.0}, {0.6, -0.5, 1.0}, {0.0, 0.65, 0.8}}},
        // 7: cross
        {{{-0.3, -1.0}, {0.3, -1.0}, {0.3, -0.3}, {1.0, -0.3}, {1.0, 0.3}, {0.3, 0.3},
          {0.3, 1.0}, {-0.3, 1.0}, {-0.3, 0.3}, {-1.0, 0.3}, {-1.0, -0.3}, {-0.3, -0.3}},
         {{0.0, 0.0, 1.0}, {0.0, -0.7, 0.8}, {0.0, 0.7, 0.8}, {-0.7, 0.0, 0.8}, {0.7, 0.0, 0.8}}},
        // 8: trapezoid
        {{{-1.0, -0.6}, {1.0, -0.6}, {0.45, 0.6}, {-0.45, 0.6}},
         {{-0.55, -0.25, 0.9}, {0.55, -0.25, 0.9}, {0.0, 0.3, 1.0}}},
        // 9: chevron
        {{{-1.0, -0.7}, {0.0, -0.2}, {1.0, -0.7}, {1.0, 0.1}, {0.0, 0.7}, {-1.0, 0.1}},
         {{-0.65, -0.25, 1.0}, {0.65, -0.25, 1.0}, {0.0, 0.3, 0.8}}},
    };
    return table;
}

bool point_in_polygon(const std::vector<Vec2>& poly, double px, double py) {
    bool inside = false;
    size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > py) != (b.y > py)) {
            double x_cross = (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x;
            if (px < x_cross) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

// ---------------------------------------------------------------------------
// Renderer
// ---------------------------------------------------------------------------

SarChip render_chip(const ChipSpec& spec) {
    spec.validate();
    const int w = spec.width, h = spec.height;
    const double cx = w / 2.0, cy = h / 2.0;
    const double scale = 0.22 * std::min(w, h);
    const double az = spec.azimuth_deg * std::numbers::pi / 180.0;
    const double cos_a = std::cos(-az), sin_a = std::sin(-az);

    const uint64_t seed_tex = derive_seed(spec.seed, 1);
    const uint64_t seed_speckle = derive_seed(spec.seed, 2);
    const uint64_t seed_target = derive_seed(spec.seed, 3);

    const Archetype& arch = archetypes()[spec.class_id];

    // Target mask: rasterize the hull rotated by azimuth about the chip centre.
    Mask m_t(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double u = (x + 0.5 - cx) / scale;
            double v = (y + 0.5 - cy) / scale;
            double ru = cos_a * u - sin_a * v;
            double rv = sin_a * u + cos_a * v;
            if (point_in_polygon(arch.hull, ru, rv)) m_t.at(x, y) = 1;
        }
    }
    if (count_set(m_t) == 0) m_t.at(w / 2, h / 2) = 1;  // degenerate tiny chips

    // Shadow: target silhouette swept away from the radar (here: +y), with
    // length cot(depression) * base. Radar look direction is fixed; only the
    // target rotates with azimuth.
    const double depression_rad = spec.depression_deg * std::numbers::pi / 180.0;
    const double shadow_base = h / 16.0;
    const int shadow_len =
        std::max(1, static_cast<int>(std::lround(shadow_base / std::tan(depression_rad))));
    Mask m_s(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (m_t.at(x, y) != 0)
                for (int k = 1; k <= shadow_len; ++k)
                    if (y + k < h) m_s.at(x, y + k) = 1;
    for (size_t i = 0; i < m_s.size(); ++i)
        if (m_t[i] != 0) m_s[i] = 0;

    // Clutter bed, then target and shadow amplitudes painted over it.
    Image amp = make_clutter_patch(spec.clutter_texture_id, w, h, seed_tex);

    Rng target_rng(seed_target);
    const double base = spec.target_reflectivity * 0.78;
    std::vector<double> field(amp.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (m_t.at(x, y) != 0)
                field[static_cast<size_t>(y) * w + x] = base * target_rng.uniform(0.9, 1.1);

    // Scatterer bumps; slight per-chip jitter keeps intra-class variation.
    for (const Scatterer& sc : arch.scatterers) {
        double ju = sc.u + target_rng.uniform(-0.05, 0.05);
        double jv = sc.v + target_rng.uniform(-0.05, 0.05);
        // unit space -> pixel space (forward rotation by azimuth)
        double pu = std::cos(az) * ju - std::sin(az) * jv;
        double pv = std::sin(az) * ju + std::cos(az) * jv;
        double px = cx + pu * scale, py = cy + pv * scale;
        double bump_amp = spec.target_reflectivity * sc.intensity * 0.45;
        double sigma = 1.3;
        int r = 4;
        for (int y = std::max(0, (int)py - r); y <= std::min(h - 1, (int)py + r); ++y) {
            for (int x = std::max(0, (int)px - r); x <= std::min(w - 1, (int)px + r); ++x) {
                if (m_t.at(x, y) == 0) continue;
                double d2 = (x + 0.5 - px) * (x + 0.5 - px) + (y + 0.5 - py) * (y + 0.5 - py);
                field[static_cast<size_t>(y) * w + x] +=
                    bump_amp * std::exp(-d2 / (2.0 * sigma * sigma));
            }
        }
    }

    constexpr double kShadowGain = 0.12;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            if (m_t.at(x, y) != 0)
                amp[i] = static_cast<float>(std::clamp(field[i], 0.0, 1.0));
            else if (m_s.at(x, y) != 0)
                amp[i] = static_cast<float>(amp[i] * kShadowGain);
        }
    }

    SarChip chip;
    chip.amplitude = add_speckle(amp, spec.speckle_looks, seed_speckle);
    chip.target_mask = std::move(m_t);
    chip.shadow_mask = std::move(m_s);
    chip.label = spec.class_id;
    chip.domain = Domain::Syn;
    chip.spec = spec;
    return chip;
}

}  // namespace sarlab
