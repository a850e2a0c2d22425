#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sarlab/nn/model.hpp"
#include "sarlab/scene.hpp"

namespace sarlab {

struct TrainConfig {
    int epochs = 100;
    double lr = 0.001;
    int batch_size = 64;
    double lambda_adv = 1.0;   // GRL strength (scaled by the ramp schedule)
    double lambda_mask = 1.0;  // weight of the positional supervision losses
    bool grl_ramp = true;      // 2/(1+exp(-10p)) - 1 over training progress p
    uint64_t seed = 0;
    nn::ModelConfig model;
    std::string log_path;      // optional JSONL, one record per epoch

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double cls_loss = 0, adv_loss = 0, mask_loss = 0;
    double train_acc = 0, dom_acc = 0;
    double wall_s = 0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    int64_t steps = 0;
};

struct TrainedModel {
    std::unique_ptr<nn::Model<float>> model;
    TrainLog log;
};

// GRL ramp schedule at training progress p in [0,1].
double grl_schedule(double p, bool ramp);

// Joint training over the tagged source domains: mixed minibatches, gradient
// reversal for the domain head, per-stage positional losses, adaptive-moment
// updates. Deterministic for a fixed seed.
TrainedModel train(const Corpus& d_syn, const Corpus& d_aug, const TrainConfig& cfg);

// Mask-free prediction for one amplitude chip.
struct Prediction {
    int label = 0;
    std::vector<double> probs;
};
Prediction infer(nn::Model<float>& model, const Image& amplitude);

// Batched forward in eval phase; returns per-chip predicted labels.
std::vector<int> predict_labels(nn::Model<float>& model, const Corpus& corpus,
                                int batch_size = 64);

// Assembles a forward batch from corpus chips [begin, end).
nn::Batch<float> make_batch(const Corpus& corpus, const std::vector<size_t>& order, size_t begin,
                            size_t end, bool with_masks);

}  // namespace sarlab
