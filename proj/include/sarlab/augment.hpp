#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sarlab/scene.hpp"

namespace sarlab {

struct AugParams {
    double n_m_lo = 1.0, n_m_hi = 1.4;          // clutter mean multiplier range
    double n_sigma_lo = 0.7, n_sigma_hi = 1.3;  // clutter std multiplier range
    double sigma_g = 0.05;                      // additive Gaussian noise std
    int augment_factor = 10;                    // copies per source chip
    uint64_t seed = 0;

    void validate() const;
};

// Two-component 1-D Gaussian mixture, components ordered by mean
// (index 0 = lower mean = clutter population).
struct Gmm2 {
    double mean[2] = {0, 0};
    double var[2] = {0, 0};
    double weight[2] = {0.5, 0.5};
    bool ok = false;
};

// Deterministic EM fit (quantile-split init, no randomness). ok=false when the
// sample is too flat to support two components.
Gmm2 fit_gmm2(const std::vector<float>& values, int max_iters = 64);

// Rescales the clutter population's mean by n_m and std by n_sigma through
// monotone histogram matching (256 bins), then jitters target-region pixels by
// up to jitter_bins histogram bins. Masks, label, and domain are untouched.
SarChip perturb_clutter_stats(const SarChip& chip, double n_m, double n_sigma, uint64_t seed,
                              int jitter_bins = 1);

// Adds i.i.d. N(0, sigma_g^2) and clips to [0,1].
Image add_gaussian_noise(const Image& amplitude, double sigma_g, uint64_t seed);

// Full augmentation of one chip: sampled multipliers -> histogram matching ->
// target jitter -> Gaussian noise. Domain tag set to Aug.
SarChip augment_chip(const SarChip& chip, const AugParams& params, uint64_t seed);

// D_Syn (tag unchanged) plus D_Aug with augment_factor copies per chip.
std::pair<Corpus, Corpus> build_source_domains(const Corpus& syn, const AugParams& params);

}  // namespace sarlab
