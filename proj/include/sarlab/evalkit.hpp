#pragma once

#include <string>
#include <vector>

#include "sarlab/scr.hpp"
#include "sarlab/trainer.hpp"

namespace sarlab {

// Top-1 accuracy of mask-free inference over a labeled corpus.
double evaluate_accuracy(nn::Model<float>& model, const Corpus& test, int batch_size = 64);

// Clutter-reduced feature maps of one stage for every chip (eval phase).
std::vector<FeatureMap> capture_stage_features(nn::Model<float>& model, const Corpus& corpus,
                                               int stage, int batch_size = 64);

// Mean feature-level SCR at a stage over a corpus. +inf sentinels are
// excluded from the mean and counted separately.
struct FeatureScrStat {
    double mean = 0.0;
    int n_inf = 0;
    int n = 0;
};
FeatureScrStat corpus_feature_scr(nn::Model<float>& model, const Corpus& corpus, int stage,
                                  int batch_size = 64);

struct ScrCurvePoint {
    double delta_db = 0.0;
    double accuracy = 0.0;
    double mean_feature_scr = 0.0;
    int n_inf = 0;
};
struct ScrCurve {
    int stage = 0;
    std::vector<ScrCurvePoint> points;
    double dacc_0_minus3 = 0.0;  // acc(0) - acc(-3); NaN when the sweep lacks the endpoint
    double dacc_0_plus3 = 0.0;
};
ScrCurve scr_curve(nn::Model<float>& model, const ScrSweep& sweep, int stage,
                   int batch_size = 64);

// Monte-Carlo permutation Shapley over a square superpixel grid. The budget
// counts masked model evaluations; each permutation walk spends grid^2 + 1.
struct AttributionParams {
    int grid = 8;
    int budget = 256;
    double fill = 0.0;  // occlusion amplitude; use the corpus clutter mean
    uint64_t seed = 0;
    bool emit_map = false;

    void validate() const;
};
struct AttributionReport {
    double target_share = 0.0, shadow_share = 0.0, clutter_share = 0.0;
    std::string method;
    int samples = 0;
    bool degenerate = false;
    double fill = 0.0;
    Image db_map;  // 20*log10(|phi|/max), floored at -40; empty unless requested
};
AttributionReport attribute(nn::Model<float>& model, const SarChip& chip,
                            const AttributionParams& params);

// Mean clutter amplitude across a corpus (the occlusion fill baseline).
double corpus_clutter_mean(const Corpus& corpus);

// Mean attribution shares over a set of chips.
AttributionReport attribute_corpus(nn::Model<float>& model, const Corpus& corpus,
                                   const AttributionParams& params);

struct AblationConfig {
    bool use_f_t = false, use_f_s = false, use_l_t = false, use_l_s = false, use_adv = false;
    std::string label;
};
// The ten standard rows: plain CNN, adversarial-only, loss/branch subsets,
// and the full model.
std::vector<AblationConfig> default_ablation_grid();

struct AblationRow {
    AblationConfig config;
    std::vector<double> per_seed;
    double mean_accuracy = 0.0;
    double delta_vs_plain = 0.0;
};
struct AblationTable {
    std::vector<AblationRow> rows;
    bool has_plain_row = false;
};
AblationTable run_ablation(const std::vector<AblationConfig>& grid, const Corpus& d_syn,
                           const Corpus& d_aug, const Corpus& test, const TrainConfig& base,
                           const std::vector<uint64_t>& seeds);

}  // namespace sarlab
