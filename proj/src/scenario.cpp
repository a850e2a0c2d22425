#include "sarlab/scenario.hpp"

#include <cmath>

#include "sarlab/common.hpp"
#include "sarlab/rng.hpp"

namespace sarlab {

void DomainSampling::validate() const {
    if (texture_pool.empty()) throw ArgumentError("DomainSampling: empty texture pool");
    for (int id : texture_pool)
        if (!texture_id_known(id))
            throw ConfigurationError("DomainSampling: unknown texture id " + std::to_string(id));
    if (speckle_looks < 1) throw ArgumentError("DomainSampling: speckle_looks must be >= 1");
    if (depression_lo > depression_hi || depression_lo < 14.0 || depression_hi > 17.0)
        throw ArgumentError("DomainSampling: depression band must lie in [14,17]");
    if (reflectivity_lo > reflectivity_hi || reflectivity_lo <= 0.0 || reflectivity_hi > 1.0)
        throw ArgumentError("DomainSampling: reflectivity band must lie in (0,1]");
}

void ScenarioSpec::validate() const {
    if (id < 1 || id > 4) throw ArgumentError("ScenarioSpec: id must be in 1..4");
    if (chip_width <= 0 || chip_height <= 0)
        throw ArgumentError("ScenarioSpec: chip size must be positive");
    if (n_classes < 1 || n_classes > kNumClasses)
        throw ArgumentError("ScenarioSpec: n_classes must be in [1,10]");
    train.validate();
    test.validate();
    if (id == 3) {
        if (sweep_step_db <= 0.0 || sweep_range_db <= 0.0)
            throw ArgumentError("ScenarioSpec: scenario 3 requires a positive SCR sweep");
        const double k = sweep_range_db / sweep_step_db;
        if (std::abs(k - std::round(k)) > 1e-9)
            throw ArgumentError("ScenarioSpec: sweep step must divide sweep range");
    }
    if (id == 4) {
        if (swap_texture_ids.empty())
            throw ArgumentError("ScenarioSpec: scenario 4 requires swap textures");
        for (int t : swap_texture_ids)
            if (!texture_id_known(t))
                throw ConfigurationError("ScenarioSpec: unknown swap texture " + std::to_string(t));
    }
}

ScenarioSpec ScenarioSpec::preset(int id) {
    ScenarioSpec s;
    s.id = id;
    s.train_include_aug = id != 1;
    s.train.texture_pool = texture_pool_train();
    s.train.speckle_looks = 4;
    s.train.depression_lo = 14.0;
    s.train.depression_hi = 16.0;
    s.train.tag = Domain::Syn;
    s.test.texture_pool = texture_pool_measured_like();
    s.test.speckle_looks = 2;
    s.test.depression_lo = 17.0;
    s.test.depression_hi = 17.0;
    s.test.reflectivity_lo = 0.72;
    s.test.reflectivity_hi = 0.92;
    s.test.tag = Domain::MeaLike;
    if (id == 4) s.swap_texture_ids = texture_pool_unknown();
    s.validate();
    return s;
}

Corpus make_domain_dataset(const DomainSampling& sampling, int n_per_class, int width, int height,
                           uint64_t seed, int n_classes) {
    sampling.validate();
    if (n_per_class < 1) throw ArgumentError("make_domain_dataset: n_per_class must be >= 1");
    if (n_classes < 1 || n_classes > kNumClasses)
        throw ArgumentError("make_domain_dataset: n_classes must be in [1," +
                            std::to_string(kNumClasses) + "]");
    Corpus corpus;
    corpus.reserve(static_cast<size_t>(n_classes) * n_per_class);
    for (int c = 0; c < n_classes; ++c) {
        for (int i = 0; i < n_per_class; ++i) {
            Rng rng(derive_seed(seed, static_cast<uint64_t>(c), static_cast<uint64_t>(i)));
            ChipSpec spec;
            spec.width = width;
            spec.height = height;
            spec.class_id = c;
            spec.azimuth_deg = rng.uniform(0.0, 360.0);
            spec.depression_deg = rng.uniform(sampling.depression_lo, sampling.depression_hi);
            spec.target_reflectivity =
                rng.uniform(sampling.reflectivity_lo, sampling.reflectivity_hi);
            spec.clutter_texture_id =
                sampling.texture_pool[static_cast<size_t>(rng.uniform_int(
                    0, static_cast<int>(sampling.texture_pool.size()) - 1))];
            spec.speckle_looks = sampling.speckle_looks;
            spec.seed = rng.next_u64();
            SarChip chip = render_chip(spec);
            chip.domain = sampling.tag;
            corpus.push_back(std::move(chip));
        }
    }
    return corpus;
}

Corpus make_dataset(const ScenarioSpec& scenario, int n_per_class, uint64_t seed) {
    scenario.validate();
    return make_domain_dataset(scenario.train, n_per_class, scenario.chip_width,
                               scenario.chip_height, derive_seed(seed, 0x7472),
                               scenario.n_classes);
}

Corpus make_test_set(const ScenarioSpec& scenario, int n_per_class, uint64_t seed) {
    scenario.validate();
    Corpus test = make_domain_dataset(scenario.test, n_per_class, scenario.chip_width,
                                      scenario.chip_height, derive_seed(seed, 0x7465),
                                      scenario.n_classes);
    if (scenario.id == 4) {
        for (size_t i = 0; i < test.size(); ++i) {
            const int tex = scenario.swap_texture_ids[i % scenario.swap_texture_ids.size()];
            Image patch =
                make_clutter_patch(tex, test[i].amplitude.width(), test[i].amplitude.height(),
                                   derive_seed(seed, 0x7377, static_cast<uint64_t>(i)));
            patch = add_speckle(patch, scenario.test.speckle_looks,
                                derive_seed(seed, 0x7370, static_cast<uint64_t>(i)));
            test[i] = composite_clutter(test[i], patch);
        }
    }
    return test;
}

ScrSweep make_sweep_sets(const Corpus& test_set, const ScenarioSpec& scenario) {
    scenario.validate();
    return build_scr_sweep(test_set, scenario.sweep_range_db, scenario.sweep_step_db);
}

}  // namespace sarlab
