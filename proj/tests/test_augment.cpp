#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sarlab/augment.hpp"
#include "sarlab/rng.hpp"
#include "sarlab/scenario.hpp"
#include "sarlab/scene.hpp"
#include "testutil.hpp"

using namespace sarlab;

namespace {

SarChip rendered_chip(uint64_t seed) {
    ChipSpec s;
    s.class_id = static_cast<int>(seed % kNumClasses);
    s.seed = seed;
    return render_chip(s);
}

double clutter_mean_of(const SarChip& c) {
    return masked_mean(c.amplitude, clutter_mask(c.target_mask, c.shadow_mask));
}

}  // namespace

TEST_CASE("fit_gmm2 recovers a well-separated two-component mixture") {
    Rng rng(101);
    std::vector<float> sample;
    for (int i = 0; i < 8000; ++i) {
        const bool low = rng.uniform01() < 0.6;
        const double v = low ? rng.normal(0.25, 0.04) : rng.normal(0.75, 0.06);
        sample.push_back(static_cast<float>(std::clamp(v, 0.0, 1.0)));
    }
    Gmm2 g = fit_gmm2(sample);
    REQUIRE(g.ok);
    CHECK(g.mean[0] < g.mean[1]);  // component 0 is the lower-mean population
    CHECK(g.mean[0] == doctest::Approx(0.25).epsilon(0.08));
    CHECK(g.mean[1] == doctest::Approx(0.75).epsilon(0.08));
    CHECK(g.weight[0] == doctest::Approx(0.6).epsilon(0.1));
    CHECK(g.weight[0] + g.weight[1] == doctest::Approx(1.0));
    CHECK(std::sqrt(g.var[0]) == doctest::Approx(0.04).epsilon(0.3));
    CHECK(std::sqrt(g.var[1]) == doctest::Approx(0.06).epsilon(0.3));
}

TEST_CASE("fit_gmm2 refuses flat or tiny samples") {
    CHECK_FALSE(fit_gmm2(std::vector<float>(100, 0.3f)).ok);
    CHECK_FALSE(fit_gmm2(std::vector<float>{0.1f, 0.9f}).ok);
}

TEST_CASE("identity multipliers reproduce the input within quantization") {
    SarChip c = rendered_chip(5);
    SarChip out = perturb_clutter_stats(c, 1.0, 1.0, 42, /*jitter_bins=*/0);
    float worst = 0.0f;
    for (size_t i = 0; i < c.amplitude.size(); ++i)
        worst = std::max(worst, std::abs(out.amplitude[i] - c.amplitude[i]));
    CHECK(worst <= 1.0f / 255.0f);
}

TEST_CASE("perturbed amplitudes stay inside [0,1]") {
    SarChip c = rendered_chip(6);
    for (double n_m : {0.8, 1.0, 1.4, 2.0}) {
        for (double n_s : {0.7, 1.0, 1.3}) {
            SarChip out = perturb_clutter_stats(c, n_m, n_s, 1);
            for (size_t i = 0; i < out.amplitude.size(); ++i) {
                CHECK(out.amplitude[i] >= 0.0f);
                CHECK(out.amplitude[i] <= 1.0f);
            }
        }
    }
}

TEST_CASE("histogram matching preserves clutter pixel rank order") {
    SarChip c = rendered_chip(7);
    SarChip out = perturb_clutter_stats(c, 1.3, 1.1, 9);
    Mask m_c = clutter_mask(c.target_mask, c.shadow_mask);
    std::vector<size_t> idx;
    for (size_t i = 0; i < m_c.size(); ++i)
        if (m_c[i]) idx.push_back(i);
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return c.amplitude[a] < c.amplitude[b]; });
    for (size_t k = 1; k < idx.size(); ++k)
        CHECK(out.amplitude[idx[k - 1]] <= out.amplitude[idx[k]]);
}

TEST_CASE("perturbation leaves masks, label, and domain untouched") {
    SarChip c = rendered_chip(8);
    SarChip out = perturb_clutter_stats(c, 1.2, 0.9, 3);
    CHECK(out.target_mask == c.target_mask);
    CHECK(out.shadow_mask == c.shadow_mask);
    CHECK(out.label == c.label);
    CHECK(out.domain == c.domain);
}

TEST_CASE("degenerate image falls back to global scaling with the flag set") {
    SarChip c;
    c.amplitude = Image(16, 16, 0.25f);
    c.target_mask = Mask(16, 16, 0);
    c.shadow_mask = Mask(16, 16, 0);
    c.target_mask.at(0, 0) = 1;
    SarChip out = perturb_clutter_stats(c, 1.2, 1.0, 1, 0);
    CHECK(out.aug_fallback);
    // Global affine rescale about the mean: constant image maps to mean * n_m.
    CHECK(out.amplitude[40] == doctest::Approx(0.3).epsilon(1e-5));
}

TEST_CASE("multiplier arguments are validated") {
    SarChip c = rendered_chip(9);
    CHECK_THROWS_AS(perturb_clutter_stats(c, 0.0, 1.0, 1), ArgumentError);
    CHECK_THROWS_AS(perturb_clutter_stats(c, 1.0, -0.5, 1), ArgumentError);
    CHECK_THROWS_AS(perturb_clutter_stats(c, 1.0, 1.0, 1, -1), ArgumentError);
}

TEST_CASE("gaussian noise: zero sigma is the identity") {
    SarChip c = rendered_chip(10);
    CHECK(add_gaussian_noise(c.amplitude, 0.0, 5) == c.amplitude);
    CHECK_THROWS_AS(add_gaussian_noise(c.amplitude, -0.1, 5), ArgumentError);
}

TEST_CASE("gaussian noise clips at the amplitude boundaries") {
    Image bright(32, 32, 0.999f);
    Image dark(32, 32, 0.001f);
    Image b = add_gaussian_noise(bright, 0.1, 1);
    Image d = add_gaussian_noise(dark, 0.1, 2);
    for (size_t i = 0; i < b.size(); ++i) {
        CHECK(b[i] <= 1.0f);
        CHECK(d[i] >= 0.0f);
    }
}

TEST_CASE("gaussian noise sample std matches sigma_g away from the clip boundaries") {
    Image base(400, 256, 0.5f);
    Image out = add_gaussian_noise(base, 0.05, 77);
    double mean = 0.0;
    for (size_t i = 0; i < out.size(); ++i) mean += out[i] - 0.5;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
        const double d = (out[i] - 0.5) - mean;
        var += d * d;
    }
    var /= static_cast<double>(out.size());
    CHECK(std::sqrt(var) == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("augment_chip is deterministic and tags the Aug domain") {
    SarChip c = rendered_chip(11);
    AugParams p;
    SarChip a = augment_chip(c, p, 123);
    SarChip b = augment_chip(c, p, 123);
    CHECK(a.amplitude == b.amplitude);
    CHECK(a.domain == Domain::Aug);
    SarChip other = augment_chip(c, p, 124);
    CHECK_FALSE(a.amplitude == other.amplitude);
}

TEST_CASE("build_source_domains multiplies the corpus and propagates labels") {
    ScenarioSpec sc = ScenarioSpec::preset(2);
    Corpus syn = make_dataset(sc, 2, 21);
    AugParams p;
    p.augment_factor = 10;
    p.seed = 3;
    auto [d_syn, d_aug] = build_source_domains(syn, p);
    CHECK(d_syn.size() == 20);
    CHECK(d_aug.size() == 200);
    for (size_t i = 0; i < d_aug.size(); ++i) {
        const SarChip& parent = syn[i / 10];
        CHECK(d_aug[i].label == parent.label);
        CHECK(d_aug[i].target_mask == parent.target_mask);
        CHECK(d_aug[i].shadow_mask == parent.shadow_mask);
        CHECK(d_aug[i].domain == Domain::Aug);
    }
    // The synthetic half is passed through untouched.
    for (size_t i = 0; i < syn.size(); ++i) CHECK(d_syn[i].amplitude == syn[i].amplitude);
}

TEST_CASE("augmented clutter is brighter on average than synthetic clutter") {
    ScenarioSpec sc = ScenarioSpec::preset(2);
    Corpus syn = make_dataset(sc, 3, 31);
    AugParams p;
    p.augment_factor = 4;
    p.seed = 5;
    auto [d_syn, d_aug] = build_source_domains(syn, p);
    REQUIRE(d_aug.size() >= 100);
    double syn_mean = 0.0, aug_mean = 0.0;
    for (const SarChip& c : d_syn) syn_mean += clutter_mean_of(c);
    for (const SarChip& c : d_aug) aug_mean += clutter_mean_of(c);
    syn_mean /= static_cast<double>(d_syn.size());
    aug_mean /= static_cast<double>(d_aug.size());
    CHECK(aug_mean >= syn_mean);
}

TEST_CASE("pinned multipliers scale the clutter mean as configured") {
    SarChip c = rendered_chip(12);
    AugParams p;
    p.n_m_lo = p.n_m_hi = 1.3;
    p.n_sigma_lo = p.n_sigma_hi = 1.0;
    p.sigma_g = 0.0;
    SarChip out = augment_chip(c, p, 2);
    const double ratio = clutter_mean_of(out) / clutter_mean_of(c);
    CHECK(ratio == doctest::Approx(1.3).epsilon(0.15));
}

TEST_CASE("augmentation parameter validation") {
    AugParams p;
    p.n_m_lo = 1.5;
    p.n_m_hi = 1.0;
    CHECK_THROWS_AS(p.validate(), ArgumentError);
    p = AugParams{};
    p.augment_factor = 0;
    CHECK_THROWS_AS(p.validate(), ArgumentError);
    p = AugParams{};
    p.sigma_g = -0.01;
    CHECK_THROWS_AS(p.validate(), ArgumentError);
    Corpus empty;
    CHECK_THROWS_AS(build_source_domains(empty, AugParams{}), ArgumentError);
}
