#pragma once

#include <cstdint>
#include <vector>

#include "sarlab/augment.hpp"
#include "sarlab/scene.hpp"
#include "sarlab/scr.hpp"

namespace sarlab {

// How one domain's chips are sampled: texture family, speckle harshness,
// depression band, reflectivity band.
struct DomainSampling {
    std::vector<int> texture_pool;
    int speckle_looks = 4;
    double depression_lo = 14.0, depression_hi = 16.0;
    double reflectivity_lo = 0.78, reflectivity_hi = 0.92;
    Domain tag = Domain::Syn;

    void validate() const;
};

// One of the four experimental setups:
//   1  train on synthetic only, test on the measured-like domain
//   2  train on synthetic + augmented, test on the measured-like domain
//   3  scenario 2 plus an SCR sweep over the test set
//   4  scenario 2 plus unknown-clutter substitution in the test set
struct ScenarioSpec {
    int id = 2;
    int chip_width = 64, chip_height = 64;
    int n_classes = kNumClasses;
    bool train_include_aug = true;
    DomainSampling train;
    DomainSampling test;
    double sweep_range_db = 3.0, sweep_step_db = 0.5;  // scenario 3
    std::vector<int> swap_texture_ids;                 // scenario 4

    void validate() const;
    static ScenarioSpec preset(int id);
};

// Balanced per-class sampling from one domain description.
Corpus make_domain_dataset(const DomainSampling& sampling, int n_per_class, int width, int height,
                           uint64_t seed, int n_classes = kNumClasses);

// Synthetic training base for a scenario (domain Syn; augmentation is applied
// separately via build_source_domains).
Corpus make_dataset(const ScenarioSpec& scenario, int n_per_class, uint64_t seed);

// Measured-like test set; scenario 4 swaps in unknown clutter.
Corpus make_test_set(const ScenarioSpec& scenario, int n_per_class, uint64_t seed);

// Scenario-3 sweep over an already-built test set.
ScrSweep make_sweep_sets(const Corpus& test_set, const ScenarioSpec& scenario);

}  // namespace sarlab
