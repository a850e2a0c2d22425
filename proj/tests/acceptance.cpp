// Go/no-go harness: ten independent checks covering SCR machinery exactness,
// gradient correctness, parameter routing, mask-free inference, the
// desk-scale domain-generalization protocol, feature-level clutter metrics,
// attribution, robustness, the ablation ordering, and pipeline determinism.
// Prints one PASS/FAIL line per check; exits nonzero if any fail.
//
// Usage: acceptance [N ...]   run only the listed check numbers (default all)

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sarlab/augment.hpp"
#include "sarlab/corpus_io.hpp"
#include "sarlab/evalkit.hpp"
#include "sarlab/nn/checkpoint.hpp"
#include "sarlab/scenario.hpp"
#include "sarlab/scr.hpp"
#include "sarlab/segmentation.hpp"
#include "sarlab/trainer.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sarlab;
using namespace sarlab::nn;
using sarlab::testutil::random_batch;

using DTape = Tape<double>;
using DVar = DTape::Var;

namespace {

// ---------------------------------------------------------------------------
// Desk-scale protocol shared by checks 5-9. The corpora reproduce the
// build-scenarios CLI layout bit for bit (same seed-derivation constants).
struct Protocol {
    uint64_t data_seed = 11;
    int classes = 10, per_class = 30, size = 64;
    int aug_factor = 1;
    double sigma_g = 0.05;
    double test_offset_db = -2.0;  // clutter texture change + SCR offset
    int epochs = 24;
    double lr = 0.003;
    int batch = 32;
    double lambda_adv = 0.05;
    double lambda_mask = 1.0;
    int c1 = 8, c2 = 16;
    std::vector<uint64_t> seeds = {1, 2, 3};
};

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct CheckResult {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

Mask clutter_mask_of(const SarChip& chip) {
    Mask m_c(chip.amplitude.width(), chip.amplitude.height(), 0);
    for (size_t i = 0; i < m_c.size(); ++i)
        m_c[i] = (chip.target_mask[i] == 0 && chip.shadow_mask[i] == 0) ? 1 : 0;
    return m_c;
}

// ---------------------------------------------------------------------------
// 1. SCR shift exactness over 100 chips x 13 deltas, plus sweep production.
CheckResult check_scr_exactness() {
    Rng rng(2024);
    Corpus chips;
    for (int i = 0; i < 100; ++i) {
        ChipSpec spec;
        spec.width = spec.height = 64;
        spec.class_id = rng.uniform_int(0, kNumClasses - 1);
        spec.azimuth_deg = rng.uniform(0.0, 359.0);
        spec.clutter_texture_id = texture_pool_train()[rng.uniform_int(0, 3)];
        spec.seed = derive_seed(909, i);
        SarChip chip = render_chip(spec);
        // Scale below the clipping ceiling so a -3 dB shift (clutter x1.413)
        // cannot saturate; image SCR is invariant under global scaling.
        float peak = 0.0f;
        for (size_t k = 0; k < chip.amplitude.size(); ++k)
            peak = std::max(peak, chip.amplitude[k]);
        const float scale = 0.65f / std::max(peak, 1e-6f);
        for (size_t k = 0; k < chip.amplitude.size(); ++k) chip.amplitude[k] *= scale;
        chips.push_back(std::move(chip));
    }

    double worst = 0.0;
    int clipped = 0, pairs = 0;
    for (const SarChip& chip : chips) {
        const Mask m_c = clutter_mask_of(chip);
        const double base = image_scr(chip.amplitude, chip.target_mask, m_c).value_db;
        for (int k = 0; k <= 12; ++k) {
            const double delta = -3.0 + 0.5 * k;
            const SarChip shifted = shift_scr(chip, delta);
            clipped += shifted.clipped;
            const double got = image_scr(shifted.amplitude, shifted.target_mask, m_c).value_db;
            worst = std::max(worst, std::abs(got - (base + delta)));
            ++pairs;
        }
    }

    const ScrSweep sweep = build_scr_sweep(Corpus(chips.begin(), chips.begin() + 10));
    const bool pass = worst <= 0.05 && clipped == 0 && sweep.sets.size() == 13;
    return {pass, "max |scr(shift(chip,d)) - scr(chip) - d| = " + fmt(worst) + " dB over " +
                      std::to_string(pairs) + " pairs, " + std::to_string(clipped) +
                      " clipped, " + std::to_string(sweep.sets.size()) + " sweep sets"};
}

// ---------------------------------------------------------------------------
// 2. Gradient correctness: exact reversal scaling plus finite differences.
enum class LossKind { Cls, Adv, Mask };

double model_loss(Model<double>& m, const Batch<double>& batch, LossKind kind, double lambda,
                  bool* backward = nullptr) {
    DTape tape;
    const bool with_masks = kind == LossKind::Mask;
    auto res = m.forward(tape, batch, Phase::Train, lambda, with_masks);
    std::vector<std::pair<DVar, double>> terms;
    if (kind == LossKind::Cls) terms.push_back({tape.nll(res.logp_cls, batch.labels), 1.0});
    if (kind == LossKind::Adv) terms.push_back({tape.nll(res.logp_dom, batch.domains), 1.0});
    if (with_masks)
        for (int s = 0; s < ModelConfig::kStages; ++s) {
            if (res.mask_loss_t[s] >= 0) terms.push_back({res.mask_loss_t[s], 1.0});
            if (res.mask_loss_s[s] >= 0) terms.push_back({res.mask_loss_s[s], 1.0});
        }
    DVar loss = tape.weighted_sum(terms);
    const double value = tape.val(loss)[0];
    if (backward && *backward) tape.backward(loss);
    return value;
}

ModelConfig tiny_double_config() {
    ModelConfig cfg;
    cfg.in_height = cfg.in_width = 8;
    cfg.c1 = 2;
    cfg.c2 = 3;
    cfg.num_classes = 3;
    cfg.disc_hidden = 4;
    return cfg;
}

// FD sweep over >= n_coords coordinates sampled across all non-running-stat
// parameters; returns {worst rel err, coords checked}.
std::pair<double, int> fd_sweep(Model<double>& m, const Batch<double>& batch, LossKind kind,
                                double lambda, int n_coords, uint64_t seed) {
    bool do_backward = true;
    model_loss(m, batch, kind, lambda, &do_backward);
    std::vector<std::pair<Param<double>*, size_t>> candidates;
    std::map<Param<double>*, std::vector<double>> analytic;
    for (Param<double>* p : m.params().all()) {
        if (p->name.find("run_mean") != std::string::npos ||
            p->name.find("run_var") != std::string::npos)
            continue;
        analytic[p] = p->grad;
        for (size_t i = 0; i < p->value.size(); ++i) candidates.push_back({p, i});
    }
    Rng rng(seed);
    double worst = 0.0;
    const double h = 1e-5;
    for (int k = 0; k < n_coords; ++k) {
        auto [p, i] = candidates[rng.uniform_int(0, static_cast<int>(candidates.size()) - 1)];
        const double keep = p->value[i];
        p->value[i] = keep + h;
        const double up = model_loss(m, batch, kind, lambda);
        p->value[i] = keep - h;
        const double dn = model_loss(m, batch, kind, lambda);
        p->value[i] = keep;
        const double num = (up - dn) / (2.0 * h);
        const double a = analytic[p][i];
        worst = std::max(worst, std::abs(num - a) / std::max({1.0, std::abs(num), std::abs(a)}));
    }
    return {worst, n_coords};
}

CheckResult check_gradients() {
    // Reversal layer backward must be exactly -lambda times the incoming
    // gradient: compare against the same graph without the reversal.
    const double lambda = 0.7;
    std::vector<double> x0(32), w(32);
    Rng rng(55);
    for (auto& v : x0) v = rng.uniform(-1.0, 1.0);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    Param<double> p_plain{"x", Shape4{1, 1, 1, 32}, x0, {}};
    Param<double> p_grl{"x", Shape4{1, 1, 1, 32}, x0, {}};
    {
        DTape t;
        t.backward(t.dot(t.leaf(p_plain), w));
    }
    {
        DTape t;
        t.backward(t.dot(t.grl(t.leaf(p_grl), lambda), w));
    }
    for (size_t i = 0; i < w.size(); ++i)
        if (p_grl.grad[i] != -lambda * p_plain.grad[i])
            return {false, "reversal backward is not exactly -lambda * upstream at coord " +
                               std::to_string(i)};

    Model<double> m(tiny_double_config(), 77);
    const auto batch = random_batch<double>(3, 8, 8, 3, 901, true);
    const auto [w_cls, n_cls] = fd_sweep(m, batch, LossKind::Cls, 0.0, 120, 1);
    const auto [w_adv, n_adv] = fd_sweep(m, batch, LossKind::Adv, 0.7, 120, 2);
    const auto [w_msk, n_msk] = fd_sweep(m, batch, LossKind::Mask, 0.0, 120, 3);
    const bool pass = w_cls < 1e-4 && w_adv < 1e-4 && w_msk < 1e-4;
    return {pass, "reversal scaling exact; fd rel err cls " + fmt(w_cls, 8) + " (n=" +
                      std::to_string(n_cls) + "), adv " + fmt(w_adv, 8) + " (n=" +
                      std::to_string(n_adv) + "), mask " + fmt(w_msk, 8) + " (n=" +
                      std::to_string(n_msk) + ")"};
}

// ---------------------------------------------------------------------------
// 3. Parameter routing on a frozen batch.
CheckResult check_routing() {
    Model<double> m(tiny_double_config(), 80);
    const auto batch = random_batch<double>(3, 8, 8, 3, 904, true);
    bool do_backward = true;

    auto group_abs_sum = [&](Group g) {
        double s = 0.0;
        for (Param<double>* p : m.params().group(g))
            for (double v : p->grad) s += std::abs(v);
        return s;
    };

    model_loss(m, batch, LossKind::Adv, 0.5, &do_backward);
    const double cls_from_adv = group_abs_sum(Group::Classifier);
    const double msk_from_adv = group_abs_sum(Group::MaskEncoder);

    model_loss(m, batch, LossKind::Cls, 0.5, &do_backward);
    const double dsc_from_cls = group_abs_sum(Group::Discriminator);
    const double msk_from_cls = group_abs_sum(Group::MaskEncoder);

    model_loss(m, batch, LossKind::Mask, 0.5, &do_backward);
    const double msk_from_msk = group_abs_sum(Group::MaskEncoder);

    const bool pass = cls_from_adv == 0.0 && dsc_from_cls == 0.0 && msk_from_adv == 0.0 &&
                      msk_from_cls == 0.0 && msk_from_msk > 0.0;
    return {pass, "classifier<-adv " + fmt(cls_from_adv, 1) + ", discriminator<-cls " +
                      fmt(dsc_from_cls, 1) + ", encoder<-{adv,cls} " +
                      fmt(msk_from_adv + msk_from_cls, 1) + ", encoder<-mask " +
                      (msk_from_msk > 0 ? std::string("nonzero") : std::string("ZERO"))};
}

// ---------------------------------------------------------------------------
// 4. Mask-free inference equals the value path bit for bit.
CheckResult check_mask_free_inference() {
    ModelConfig cfg;
    cfg.in_height = cfg.in_width = 32;
    cfg.c1 = 3;
    cfg.c2 = 4;
    cfg.num_classes = 3;
    cfg.disc_hidden = 4;
    Model<float> m(cfg, 33);

    Corpus chips;
    for (int i = 0; i < 4; ++i) {
        ChipSpec spec;
        spec.width = spec.height = 32;
        spec.class_id = i % 3;
        spec.azimuth_deg = 70.0 * i;
        spec.seed = derive_seed(404, i);
        chips.push_back(render_chip(spec));
    }
    std::vector<size_t> order{0, 1, 2, 3};
    const Batch<float> with_masks = make_batch(chips, order, 0, chips.size(), true);
    const Batch<float> without = make_batch(chips, order, 0, chips.size(), false);

    // Same phase, same parameters: the value path must not feel the masks.
    Tape<float> t1, t2;
    auto r1 = m.forward(t1, with_masks, Phase::Train, 0.5f, true);
    auto r2 = m.forward(t2, without, Phase::Train, 0.5f, false);
    if (t1.val(r1.logits_cls) != t2.val(r2.logits_cls))
        return {false, "training-phase class logits differ between masked and mask-free input"};
    if (t1.val(r1.logits_dom) != t2.val(r2.logits_dom))
        return {false, "training-phase domain logits differ between masked and mask-free input"};
    if (t1.val(r1.features) != t2.val(r2.features))
        return {false, "pooled features differ between masked and mask-free input"};

    // Inference on chips whose masks are absent entirely.
    Corpus bare = chips;
    for (SarChip& c : bare) {
        c.target_mask = Mask(32, 32, 0);
        c.shadow_mask = Mask(32, 32, 0);
    }
    const std::vector<int> labels = predict_labels(m, bare, 2);
    for (size_t i = 0; i < bare.size(); ++i) {
        const Prediction p = infer(m, bare[i].amplitude);
        if (p.label != labels[i]) return {false, "batched and single-chip inference disagree"};
    }
    return {true, "value path bit-identical with and without masks; mask-free batch of " +
                      std::to_string(bare.size()) + " chips classified"};
}

// ---------------------------------------------------------------------------
// Shared training for checks 5-9.
struct ToyData {
    Corpus d_syn, d_aug;
    Corpus test_base;     // measured-like domain, unshifted
    Corpus test_shifted;  // with the protocol's SCR offset applied
};

ToyData build_toy_data(const Protocol& pr) {
    ScenarioSpec spec = ScenarioSpec::preset(2);
    spec.chip_width = spec.chip_height = pr.size;
    spec.n_classes = pr.classes;
    spec.validate();
    ToyData d;
    const Corpus syn = make_dataset(spec, pr.per_class, pr.data_seed);
    AugParams ap;
    ap.augment_factor = pr.aug_factor;
    ap.sigma_g = pr.sigma_g;
    ap.seed = derive_seed(pr.data_seed, 0x6175);
    auto [d_syn, d_aug] = build_source_domains(syn, ap);
    d.d_syn = std::move(d_syn);
    d.d_aug = std::move(d_aug);
    d.test_base = make_test_set(spec, pr.per_class, derive_seed(pr.data_seed, 0x7473));
    for (const SarChip& c : d.test_base) d.test_shifted.push_back(shift_scr(c, pr.test_offset_db));
    return d;
}

TrainConfig row_config(const Protocol& pr, const AblationConfig& row, uint64_t seed) {
    TrainConfig cfg;
    cfg.epochs = pr.epochs;
    cfg.lr = pr.lr;
    cfg.batch_size = pr.batch;
    cfg.lambda_adv = pr.lambda_adv;
    cfg.lambda_mask = pr.lambda_mask;
    cfg.seed = seed;
    cfg.model.in_height = cfg.model.in_width = pr.size;
    cfg.model.c1 = pr.c1;
    cfg.model.c2 = pr.c2;
    cfg.model.num_classes = pr.classes;
    cfg.model.use_f_t = row.use_f_t;
    cfg.model.use_f_s = row.use_f_s;
    cfg.model.use_l_t = row.use_l_t;
    cfg.model.use_l_s = row.use_l_s;
    cfg.model.use_adv = row.use_adv;
    cfg.validate();
    return cfg;
}

struct TrainedRow {
    std::vector<std::unique_ptr<Model<float>>> models;  // one per seed
    std::vector<double> per_seed_acc;                   // on the shifted test set
    double mean_acc = 0.0;
};

TrainedRow train_row(const Protocol& pr, const ToyData& data, const AblationConfig& row,
                     bool keep_models) {
    TrainedRow out;
    for (uint64_t seed : pr.seeds) {
        TrainedModel tm = train(data.d_syn, data.d_aug, row_config(pr, row, seed));
        out.per_seed_acc.push_back(evaluate_accuracy(*tm.model, data.test_shifted, 64));
        if (keep_models) out.models.push_back(std::move(tm.model));
    }
    for (double a : out.per_seed_acc) out.mean_acc += a;
    out.mean_acc /= static_cast<double>(out.per_seed_acc.size());
    return out;
}

AblationConfig row_by_label(const std::string& label) {
    for (const AblationConfig& c : default_ablation_grid())
        if (c.label == label) return c;
    throw ArgumentError("unknown ablation row: " + label);
}

// Shared state across checks 5-9 so the nine protocol trainings run once.
struct ProtocolRun {
    Protocol pr;
    ToyData data;
    TrainedRow full, cnn, grl;
    double train_wall_s = 0.0;
    bool ready = false;
};

void ensure_protocol_run(ProtocolRun& run) {
    if (run.ready) return;
    run.data = build_toy_data(run.pr);
    Timer t;
    run.full = train_row(run.pr, run.data, row_by_label("full"), true);
    run.cnn = train_row(run.pr, run.data, row_by_label("cnn"), false);
    run.grl = train_row(run.pr, run.data, row_by_label("cnn+adv"), true);
    run.train_wall_s = t.seconds();
    run.ready = true;
}

// 5. Domain-generalization margins and the training-time budget.
CheckResult check_dg_trend(ProtocolRun& run) {
    ensure_protocol_run(run);
    const double vs_cnn = run.full.mean_acc - run.cnn.mean_acc;
    const double vs_grl = run.full.mean_acc - run.grl.mean_acc;
    const bool pass = vs_cnn >= 0.05 && vs_grl >= 0.02 && run.train_wall_s < 1800.0;
    return {pass, "mean acc full " + fmt(run.full.mean_acc) + ", cnn " + fmt(run.cnn.mean_acc) +
                      " (gap " + fmt(vs_cnn) + " >= 0.05), cnn+adv " + fmt(run.grl.mean_acc) +
                      " (gap " + fmt(vs_grl) + " >= 0.02); nine trainings in " +
                      fmt(run.train_wall_s, 1) + " s < 1800 s"};
}

// 6. Feature-level SCR margins at both stages.
CheckResult check_feature_scr(ProtocolRun& run) {
    ensure_protocol_run(run);
    auto stage_mean = [&](const TrainedRow& row, int stage) {
        double s = 0.0;
        for (const auto& m : row.models)
            s += corpus_feature_scr(*m, run.data.test_shifted, stage, 64).mean;
        return s / static_cast<double>(row.models.size());
    };
    const double full1 = stage_mean(run.full, 1), grl1 = stage_mean(run.grl, 1);
    const double full2 = stage_mean(run.full, 2), grl2 = stage_mean(run.grl, 2);
    const bool pass = (full2 - grl2 >= 6.0) && (full1 - grl1 >= 3.0);
    return {pass, "stage-2 feature scr full " + fmt(full2, 2) + " vs cnn+adv " + fmt(grl2, 2) +
                      " dB (gap " + fmt(full2 - grl2, 2) + " >= 6), stage-1 " + fmt(full1, 2) +
                      " vs " + fmt(grl1, 2) + " dB (gap " + fmt(full1 - grl1, 2) + " >= 3)"};
}

// 7. Attribution: clutter share halved, shares a probability vector.
CheckResult check_attribution(ProtocolRun& run) {
    ensure_protocol_run(run);
    Corpus subset(run.data.test_shifted.begin(), run.data.test_shifted.begin() + 50);
    AttributionParams params;
    params.grid = 8;
    params.budget = 256;
    params.fill = corpus_clutter_mean(subset);
    params.seed = 515;
    bool proper = true;
    auto clutter_mean = [&](const TrainedRow& row) {
        double s = 0.0;
        for (const auto& m : row.models) {
            const AttributionReport r = attribute_corpus(*m, subset, params);
            const double total = r.target_share + r.shadow_share + r.clutter_share;
            proper = proper && std::abs(total - 1.0) < 1e-9 && r.target_share >= 0.0 &&
                     r.shadow_share >= 0.0 && r.clutter_share >= 0.0;
            s += r.clutter_share;
        }
        return s / static_cast<double>(row.models.size());
    };
    const double c_full = clutter_mean(run.full);
    const double c_grl = clutter_mean(run.grl);
    const bool pass = proper && c_full <= 0.5 * c_grl;
    return {pass, "mean clutter share over 50 chips: full " + fmt(c_full) + ", cnn+adv " +
                      fmt(c_grl) + " (need full <= half); shares " +
                      (proper ? "form probability vectors" : "BROKEN")};
}

// 8. Accuracy stability under the SCR sweep.
CheckResult check_scr_robustness(ProtocolRun& run) {
    ensure_protocol_run(run);
    const ScrSweep sweep = build_scr_sweep(run.data.test_base);
    auto mean_abs_drop = [&](const TrainedRow& row) {
        double s = 0.0;
        for (const auto& m : row.models) {
            const ScrCurve curve = scr_curve(*m, sweep, 2, 64);
            s += std::abs(curve.dacc_0_plus3);
        }
        return s / static_cast<double>(row.models.size());
    };
    const double d_full = mean_abs_drop(run.full);
    const double d_grl = mean_abs_drop(run.grl);
    const bool pass = d_full <= d_grl;
    return {pass, "mean |acc(0) - acc(+3)|: full " + fmt(d_full) + " <= cnn+adv " + fmt(d_grl)};
}

// 9. Ablation ordering: full >= every partial >= plain, full-vs-plain >= 5pts.
CheckResult check_ablation_order(ProtocolRun& run) {
    ensure_protocol_run(run);
    std::vector<std::pair<std::string, double>> partial_means;
    for (const AblationConfig& row : default_ablation_grid()) {
        if (row.label == "cnn" || row.label == "full") continue;
        if (row.label == "cnn+adv") {
            partial_means.push_back({row.label, run.grl.mean_acc});
            continue;
        }
        partial_means.push_back({row.label, train_row(run.pr, run.data, row, false).mean_acc});
    }
    bool ordered = true;
    std::string worst;
    for (const auto& [label, mean] : partial_means) {
        if (run.full.mean_acc < mean) {
            ordered = false;
            worst += " full<" + label + "(" + fmt(mean) + ")";
        }
        if (mean < run.cnn.mean_acc) {
            ordered = false;
            worst += " " + label + "(" + fmt(mean) + ")<cnn";
        }
    }
    const double gap = run.full.mean_acc - run.cnn.mean_acc;
    const bool pass = ordered && gap >= 0.05;
    std::string table = "full " + fmt(run.full.mean_acc) + " cnn " + fmt(run.cnn.mean_acc);
    for (const auto& [label, mean] : partial_means) table += " " + label + " " + fmt(mean);
    return {pass, table + (ordered ? "; ordering holds" : ";" + worst) + "; full-vs-plain gap " +
                      fmt(gap) + " >= 0.05"};
}

// ---------------------------------------------------------------------------
// 10. End-to-end pipeline determinism through the CLI.
std::string cli_binary() {
    if (const char* p = std::getenv("SARLAB_BIN")) return p;
    return "./sarlab";
}

int run_cmd(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json load_stripped(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw IoError("missing report: " + p.string());
    json j = json::parse(f);
    j.erase("generated_at");
    return j;
}

CheckResult check_determinism() {
    const fs::path root = fs::temp_directory_path() / ("sarlab_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::string bin = cli_binary();
    for (const std::string run : {"a", "b"}) {
        const fs::path d = root / run;
        fs::create_directories(d);
        const std::string scen = (d / "scen").string();
        if (run_cmd(bin + " build-scenarios --out " + scen +
                    " --scenario 2 --classes 2 --per-class 2 --size 32 --factor 2 --seed 9") != 0)
            return {false, "build-scenarios failed in run " + run};
        if (run_cmd(bin + " train --corpus " + scen + " --out " + (d / "m.ck").string() +
                    " --epochs 2 --lr 0.01 --batch 4 --c1 2 --c2 2 --classes 2 --size 32"
                    " --seed 4 --lambda-adv 0.1") != 0)
            return {false, "train failed in run " + run};
        if (run_cmd(bin + " eval --checkpoint " + (d / "m.ck").string() + " --test " + scen +
                    "/test --out " + (d / "eval.json").string() + " --seed 4") != 0)
            return {false, "eval failed in run " + run};
        if (run_cmd(bin + " scr-sweep --in " + scen + "/test --out " + (d / "sweep").string() +
                    " --range 1 --step 1") != 0)
            return {false, "scr-sweep failed in run " + run};
        if (run_cmd(bin + " scr-sweep-eval --checkpoint " + (d / "m.ck").string() + " --sweep " +
                    (d / "sweep").string() + " --out " + (d / "curve.json").string()) != 0)
            return {false, "scr-sweep-eval failed in run " + run};
        if (run_cmd(bin + " attribute --checkpoint " + (d / "m.ck").string() + " --test " + scen +
                    "/test --out " + (d / "attr.json").string() +
                    " --budget 100 --grid 4 --chips 2 --seed 6") != 0)
            return {false, "attribute failed in run " + run};
    }
    std::string diffs;
    for (const std::string name : {"eval.json", "curve.json", "attr.json"})
        if (load_stripped(root / "a" / name) != load_stripped(root / "b" / name))
            diffs += " " + name;
    {
        std::ifstream fa(root / "a" / "m.ck", std::ios::binary);
        std::ifstream fb(root / "b" / "m.ck", std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str()) diffs += " m.ck";
    }
    fs::remove_all(root);
    if (!diffs.empty()) return {false, "artifacts differ between identical runs:" + diffs};
    return {true, "eval, sweep-curve, and attribution reports plus the checkpoint are"
                  " byte-identical across repeated runs (timestamps excluded)"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    auto selected = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };

    ProtocolRun run;
    std::vector<std::pair<int, std::function<CheckResult()>>> checks = {
        {1, [&] { return check_scr_exactness(); }},
        {2, [&] { return check_gradients(); }},
        {3, [&] { return check_routing(); }},
        {4, [&] { return check_mask_free_inference(); }},
        {5, [&] { return check_dg_trend(run); }},
        {6, [&] { return check_feature_scr(run); }},
        {7, [&] { return check_attribution(run); }},
        {8, [&] { return check_scr_robustness(run); }},
        {9, [&] { return check_ablation_order(run); }},
        {10, [&] { return check_determinism(); }},
    };
    const std::map<int, double> budget_s = {{1, 60.0}, {2, 120.0}, {3, 60.0}};

    int failures = 0;
    for (auto& [id, fn] : checks) {
        if (!selected(id)) continue;
        Timer t;
        CheckResult r;
        try {
            r = fn();
        } catch (const std::exception& ex) {
            r = {false, std::string("exception: ") + ex.what()};
        }
        const double wall = t.seconds();
        if (auto it = budget_s.find(id); it != budget_s.end() && wall > it->second) {
            r.pass = false;
            r.detail += " [exceeded " + fmt(it->second, 0) + " s budget]";
        }
        std::printf("criterion %2d %s  (%8.1f s)  %s\n", id, r.pass ? "PASS" : "FAIL", wall,
                    r.detail.c_str());
        std::fflush(stdout);
        failures += !r.pass;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
