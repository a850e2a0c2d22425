#include "sarlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "sarlab/rng.hpp"

namespace sarlab {

using nn::Batch;
using nn::Model;
using nn::Phase;
using nn::Tape;

void TrainConfig::validate() const {
    if (epochs < 1) throw ArgumentError("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("TrainConfig: batch_size must be >= 1");
    if (lr <= 0.0) throw ArgumentError("TrainConfig: learning rate must be positive");
    if (lambda_adv < 0.0 || lambda_mask < 0.0)
        throw ArgumentError("TrainConfig: loss weights must be nonnegative");
    model.validate();
}

double grl_schedule(double p, bool ramp) {
    if (!ramp) return 1.0;
    return 2.0 / (1.0 + std::exp(-10.0 * p)) - 1.0;
}

Batch<float> make_batch(const Corpus& corpus, const std::vector<size_t>& order, size_t begin,
                        size_t end, bool with_masks) {
    if (begin >= end || end > order.size()) throw ContractError("make_batch: bad range");
    const SarChip& first = corpus[order[begin]];
    const int h = first.amplitude.height(), w = first.amplitude.width();
    const size_t plane = static_cast<size_t>(h) * w;

    Batch<float> b;
    b.b = static_cast<int>(end - begin);
    b.h = h;
    b.w = w;
    b.images.resize(b.b * plane);
    b.labels.resize(b.b);
    b.domains.resize(b.b);
    if (with_masks) {
        b.m_t.resize(b.b * plane);
        b.m_s.resize(b.b * plane);
    }
    for (size_t i = begin; i < end; ++i) {
        const SarChip& chip = corpus[order[i]];
        if (chip.amplitude.height() != h || chip.amplitude.width() != w)
            throw ConfigurationError("make_batch: mixed chip sizes in corpus");
        const size_t off = (i - begin) * plane;
        std::copy(chip.amplitude.data(), chip.amplitude.data() + plane, b.images.begin() + off);
        b.labels[i - begin] = chip.label;
        b.domains[i - begin] = domain_tag(chip.domain) - 1;
        if (with_masks) {
            if (count_set(chip.target_mask) == 0)
                throw ContractError("make_batch: training chip without target mask");
            for (size_t p = 0; p < plane; ++p) {
                b.m_t[off + p] = static_cast<float>(chip.target_mask[p]);
                b.m_s[off + p] = static_cast<float>(chip.shadow_mask[p]);
            }
        }
    }
    return b;
}

namespace {

int argmax_row(const std::vector<float>& v, int row, int k) {
    int best = 0;
    for (int j = 1; j < k; ++j)
        if (v[row * k + j] > v[row * k + best]) best = j;
    return best;
}

void write_epoch_log(const std::string& path, const EpochLog& e) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::app);
    if (!f) throw IoError("cannot open train log: " + path);
    nlohmann::json j = {{"epoch", e.epoch},         {"cls_loss", e.cls_loss},
                        {"adv_loss", e.adv_loss},   {"mask_loss", e.mask_loss},
                        {"train_acc", e.train_acc}, {"dom_acc", e.dom_acc},
                        {"wall_s", e.wall_s}};
    f << j.dump() << "\n";
}

void write_nan_snapshot(const std::string& path, int epoch, int64_t step, double cls, double adv,
                        double mask) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::app);
    if (!f) return;
    nlohmann::json j = {{"event", "nan_abort"}, {"epoch", epoch},   {"step", step},
                        {"cls_loss", cls},      {"adv_loss", adv},  {"mask_loss", mask}};
    f << j.dump() << "\n";
}

}  // namespace

TrainedModel train(const Corpus& d_syn, const Corpus& d_aug, const TrainConfig& cfg) {
    cfg.validate();
    if (d_syn.empty()) throw ArgumentError("train: empty source corpus");

    Corpus merged;
    merged.reserve(d_syn.size() + d_aug.size());
    merged.insert(merged.end(), d_syn.begin(), d_syn.end());
    merged.insert(merged.end(), d_aug.begin(), d_aug.end());
    for (const SarChip& c : merged) {
        const int d = domain_tag(c.domain) - 1;
        if (d < 0 || d >= cfg.model.num_domains)
            throw ContractError("train: chip domain outside discriminator range");
        if (count_set(c.target_mask) == 0)
            throw ContractError("train: chip missing target mask");
    }

    TrainedModel out;
    out.model = std::make_unique<Model<float>>(cfg.model, derive_seed(cfg.seed, "init"));
    Model<float>& model = *out.model;

    const bool use_mask_losses = cfg.model.mask_encoder_enabled() && cfg.lambda_mask > 0.0;
    const bool use_adv = cfg.model.use_adv;

    std::vector<size_t> order(merged.size());
    std::iota(order.begin(), order.end(), size_t{0});
    const int64_t steps_per_epoch =
        static_cast<int64_t>((merged.size() + cfg.batch_size - 1) / cfg.batch_size);
    const int64_t total_steps = steps_per_epoch * cfg.epochs;

    int64_t step = 0;
    Tape<float> tape;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng(derive_seed(cfg.seed, 0x6570, static_cast<uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

        EpochLog elog;
        elog.epoch = epoch;
        int64_t n_correct = 0, n_dom_correct = 0, n_seen = 0;

        for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const size_t end = std::min(order.size(), begin + cfg.batch_size);
            Batch<float> batch = make_batch(merged, order, begin, end, use_mask_losses);

            const double p = total_steps > 1 ? static_cast<double>(step) / total_steps : 0.0;
            const float lam =
                static_cast<float>(cfg.lambda_adv * grl_schedule(p, cfg.grl_ramp));

            tape.reset();
            auto res = model.forward(tape, batch, Phase::Train, lam, use_mask_losses);

            std::vector<std::pair<Tape<float>::Var, float>> terms;
            auto cls = tape.nll(res.logp_cls, batch.labels);
            terms.push_back({cls, 1.0f});
            Tape<float>::Var adv = -1;
            if (use_adv) {
                adv = tape.nll(res.logp_dom, batch.domains);
                terms.push_back({adv, 1.0f});
            }
            double mask_sum = 0.0;
            for (int s = 0; s < nn::ModelConfig::kStages; ++s) {
                for (auto v : {res.mask_loss_t[s], res.mask_loss_s[s]}) {
                    if (v >= 0) {
                        terms.push_back({v, static_cast<float>(cfg.lambda_mask)});
                        mask_sum += tape.val(v)[0];
                    }
                }
            }
            auto total = tape.weighted_sum(terms);

            const double cls_v = tape.val(cls)[0];
            const double adv_v = adv >= 0 ? tape.val(adv)[0] : 0.0;
            if (!std::isfinite(tape.val(total)[0])) {
                write_nan_snapshot(cfg.log_path, epoch, step, cls_v, adv_v, mask_sum);
                throw ContractError("train: non-finite loss at step " + std::to_string(step) +
                                    " (cls=" + std::to_string(cls_v) +
                                    ", adv=" + std::to_string(adv_v) +
                                    ", mask=" + std::to_string(mask_sum) + ")");
            }

            tape.backward(total);
            ++step;
            nn::adam_step(model.params(), cfg.lr, step);

            elog.cls_loss += cls_v;
            elog.adv_loss += adv_v;
            elog.mask_loss += mask_sum;
            const auto& logp = tape.val(res.logp_cls);
            const auto& logd = tape.val(res.logp_dom);
            for (int n = 0; n < batch.b; ++n) {
                n_correct += argmax_row(logp, n, cfg.model.num_classes) == batch.labels[n];
                n_dom_correct += argmax_row(logd, n, cfg.model.num_domains) == batch.domains[n];
            }
            n_seen += batch.b;
        }

        elog.cls_loss /= static_cast<double>(steps_per_epoch);
        elog.adv_loss /= static_cast<double>(steps_per_epoch);
        elog.mask_loss /= static_cast<double>(steps_per_epoch);
        elog.train_acc = static_cast<double>(n_correct) / static_cast<double>(n_seen);
        elog.dom_acc = static_cast<double>(n_dom_correct) / static_cast<double>(n_seen);
        elog.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_epoch_log(cfg.log_path, elog);
        out.log.epochs.push_back(elog);
    }
    out.log.steps = step;
    return out;
}

Prediction infer(Model<float>& model, const Image& amplitude) {
    Batch<float> b;
    b.b = 1;
    b.h = amplitude.height();
    b.w = amplitude.width();
    b.images.assign(amplitude.data(), amplitude.data() + amplitude.size());

    Tape<float> tape;
    auto res = model.forward(tape, b, Phase::Eval, 0.0f, false);
    const auto& logp = tape.val(res.logp_cls);
    Prediction pred;
    pred.probs.resize(logp.size());
    for (size_t i = 0; i < logp.size(); ++i) pred.probs[i] = std::exp(logp[i]);
    pred.label = 0;
    for (size_t i = 1; i < logp.size(); ++i)
        if (logp[i] > logp[pred.label]) pred.label = static_cast<int>(i);
    return pred;
}

std::vector<int> predict_labels(Model<float>& model, const Corpus& corpus, int batch_size) {
    if (corpus.empty()) throw ArgumentError("predict_labels: empty corpus");
    if (batch_size < 1) throw ArgumentError("predict_labels: batch_size must be >= 1");
    std::vector<size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<int> labels(corpus.size());
    Tape<float> tape;
    for (size_t begin = 0; begin < corpus.size(); begin += batch_size) {
        const size_t end = std::min(corpus.size(), begin + batch_size);
        Batch<float> batch = make_batch(corpus, order, begin, end, false);
        tape.reset();
        auto res = model.forward(tape, batch, Phase::Eval, 0.0f, false);
        const auto& logp = tape.val(res.logp_cls);
        const int k = model.config().num_classes;
        for (int n = 0; n < batch.b; ++n) labels[begin + n] = argmax_row(logp, n, k);
    }
    return labels;
}

}  // namespace sarlab
