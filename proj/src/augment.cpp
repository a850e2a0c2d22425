#include "sarlab/augment.hpp"

#include <algorithm>
#include <cmath>

#include "sarlab/common.hpp"
#include "sarlab/rng.hpp"

namespace sarlab {

void AugParams::validate() const {
    if (n_m_lo > n_m_hi || n_sigma_lo > n_sigma_hi)
        throw ArgumentError("AugParams: interval lower bound exceeds upper bound");
    if (n_m_lo <= 0.0 || n_sigma_lo <= 0.0)
        throw ArgumentError("AugParams: multipliers must be positive");
    if (sigma_g < 0.0) throw ArgumentError("AugParams: sigma_g must be >= 0");
    if (augment_factor < 1) throw ArgumentError("AugParams: augment_factor must be >= 1");
}

namespace {

double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

}  // namespace

Gmm2 fit_gmm2(const std::vector<float>& values, int max_iters) {
    Gmm2 g;
    if (values.size() < 16) return g;

    std::vector<float> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.back() - sorted.front() < 1e-6f) return g;  // flat sample

    // Quantile-split init: lower half is component 0, upper half component 1.
    auto moments = [](const float* lo, const float* hi) {
        double m = 0, v = 0;
        const double n = static_cast<double>(hi - lo);
        for (const float* p = lo; p != hi; ++p) m += *p;
        m /= n;
        for (const float* p = lo; p != hi; ++p) v += (*p - m) * (*p - m);
        return std::pair<double, double>(m, std::max(v / n, 1e-8));
    };
    const size_t half = sorted.size() / 2;
    std::tie(g.mean[0], g.var[0]) = moments(sorted.data(), sorted.data() + half);
    std::tie(g.mean[1], g.var[1]) = moments(sorted.data() + half, sorted.data() + sorted.size());
    g.weight[0] = g.weight[1] = 0.5;

    const double n = static_cast<double>(values.size());
    double prev_ll = -1e300;
    for (int iter = 0; iter < max_iters; ++iter) {
        double w_sum[2] = {0, 0}, m_sum[2] = {0, 0}, v_sum[2] = {0, 0}, ll = 0;
        for (float xf : values) {
            const double x = xf;
            double p0 = g.weight[0] * normal_pdf(x, g.mean[0], g.var[0]);
            double p1 = g.weight[1] * normal_pdf(x, g.mean[1], g.var[1]);
            double tot = p0 + p1;
            if (tot < 1e-300) tot = 1e-300, p0 = p1 = 0.5e-300;
            const double r0 = p0 / tot, r1 = p1 / tot;
            w_sum[0] += r0;
            w_sum[1] += r1;
            m_sum[0] += r0 * x;
            m_sum[1] += r1 * x;
            ll += std::log(tot);
        }
        if (w_sum[0] < 1e-6 || w_sum[1] < 1e-6) return g;  // component collapsed
        const double new_mean[2] = {m_sum[0] / w_sum[0], m_sum[1] / w_sum[1]};
        for (float xf : values) {
            const double x = xf;
            double p0 = g.weight[0] * normal_pdf(x, g.mean[0], g.var[0]);
            double p1 = g.weight[1] * normal_pdf(x, g.mean[1], g.var[1]);
            double tot = p0 + p1;
            if (tot < 1e-300) tot = 1e-300, p0 = p1 = 0.5e-300;
            v_sum[0] += p0 / tot * (x - new_mean[0]) * (x - new_mean[0]);
            v_sum[1] += p1 / tot * (x - new_mean[1]) * (x - new_mean[1]);
        }
        for (int c = 0; c < 2; ++c) {
            g.mean[c] = new_mean[c];
            g.var[c] = std::max(v_sum[c] / w_sum[c], 1e-8);
            g.weight[c] = w_sum[c] / n;
        }
        if (std::abs(ll - prev_ll) < 1e-9 * n) break;
        prev_ll = ll;
    }

    if (g.mean[0] > g.mean[1]) {
        std::swap(g.mean[0], g.mean[1]);
        std::swap(g.var[0], g.var[1]);
        std::swap(g.weight[0], g.weight[1]);
    }
    g.ok = true;
    return g;
}

namespace {

constexpr int kBins = 256;

// Piecewise-linear monotone intensity map built on the histogram-bin edge
// grid. With identity per-component transforms it reduces to the identity map.
struct IntensityMap {
    double edges_out[kBins + 1];

    float operator()(float v) const {
        const double x = std::clamp(static_cast<double>(v), 0.0, 1.0) * kBins;
        int b = std::min(static_cast<int>(x), kBins - 1);
        const double t = x - b;
        const double y = edges_out[b] + t * (edges_out[b + 1] - edges_out[b]);
        return static_cast<float>(std::clamp(y, 0.0, 1.0));
    }
};

IntensityMap build_match_map(const Gmm2& g, double n_m, double n_sigma) {
    IntensityMap map{};
    for (int e = 0; e <= kBins; ++e) {
        const double v = static_cast<double>(e) / kBins;
        // Responsibility of the clutter (lower-mean) component at this level.
        const double p0 = g.weight[0] * normal_pdf(v, g.mean[0], g.var[0]);
        const double p1 = g.weight[1] * normal_pdf(v, g.mean[1], g.var[1]);
        const double r0 = (p0 + p1) < 1e-300 ? (v < g.mean[1] ? 1.0 : 0.0) : p0 / (p0 + p1);
        // Affine map carrying the clutter component onto mean*n_m, std*n_sigma.
        const double clutter_v = (v - g.mean[0]) * n_sigma + g.mean[0] * n_m;
        map.edges_out[e] = std::clamp(r0 * clutter_v + (1.0 - r0) * v, 0.0, 1.0);
    }
    for (int e = 1; e <= kBins; ++e)  // monotone matching
        map.edges_out[e] = std::max(map.edges_out[e], map.edges_out[e - 1]);
    return map;
}

}  // namespace

SarChip perturb_clutter_stats(const SarChip& chip, double n_m, double n_sigma, uint64_t seed,
                              int jitter_bins) {
    if (n_m <= 0.0 || n_sigma <= 0.0)
        throw ArgumentError("perturb_clutter_stats: multipliers must be positive");
    if (jitter_bins < 0) throw ArgumentError("perturb_clutter_stats: jitter_bins must be >= 0");

    SarChip out = chip;
    const Gmm2 g = fit_gmm2(chip.amplitude.pixels());

    if (g.ok) {
        const IntensityMap map = build_match_map(g, n_m, n_sigma);
        for (size_t i = 0; i < out.amplitude.size(); ++i)
            out.amplitude[i] = map(chip.amplitude[i]);
    } else {
        // Degenerate image: global affine rescale about the global mean.
        double mean = 0;
        for (size_t i = 0; i < chip.amplitude.size(); ++i) mean += chip.amplitude[i];
        mean /= static_cast<double>(chip.amplitude.size());
        for (size_t i = 0; i < out.amplitude.size(); ++i) {
            const double v = (chip.amplitude[i] - mean) * n_sigma + mean * n_m;
            out.amplitude[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
        out.aug_fallback = true;
    }

    if (jitter_bins > 0) {
        Rng rng(derive_seed(seed, 0x6a69));
        for (size_t i = 0; i < out.amplitude.size(); ++i) {
            if (out.target_mask[i] == 0) continue;
            const int shift = rng.uniform_int(-jitter_bins, jitter_bins);
            const double v = out.amplitude[i] + static_cast<double>(shift) / kBins;
            out.amplitude[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return out;
}

Image add_gaussian_noise(const Image& amplitude, double sigma_g, uint64_t seed) {
    if (sigma_g < 0.0) throw ArgumentError("add_gaussian_noise: sigma_g must be >= 0");
    if (sigma_g == 0.0) return amplitude;
    Rng rng(seed);
    Image out(amplitude.width(), amplitude.height());
    for (size_t i = 0; i < out.size(); ++i) {
        const double v = amplitude[i] + rng.normal(0.0, sigma_g);
        out[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

SarChip augment_chip(const SarChip& chip, const AugParams& params, uint64_t seed) {
    params.validate();
    Rng rng(derive_seed(seed, 0x6d75));
    const double n_m = rng.uniform(params.n_m_lo, params.n_m_hi);
    const double n_sigma = rng.uniform(params.n_sigma_lo, params.n_sigma_hi);
    SarChip out = perturb_clutter_stats(chip, n_m, n_sigma, derive_seed(seed, 0x706a));
    out.amplitude = add_gaussian_noise(out.amplitude, params.sigma_g, derive_seed(seed, 0x6e6f));
    out.domain = Domain::Aug;
    return out;
}

std::pair<Corpus, Corpus> build_source_domains(const Corpus& syn, const AugParams& params) {
    params.validate();
    if (syn.empty()) throw ArgumentError("build_source_domains: empty corpus");
    Corpus aug;
    aug.reserve(syn.size() * static_cast<size_t>(params.augment_factor));
    for (size_t i = 0; i < syn.size(); ++i)
        for (int copy = 0; copy < params.augment_factor; ++copy)
            aug.push_back(augment_chip(
                syn[i], params, derive_seed(params.seed, static_cast<uint64_t>(i), copy)));
    return {syn, aug};
}

}  // namespace sarlab
