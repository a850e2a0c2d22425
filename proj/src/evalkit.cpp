#include "sarlab/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sarlab/rng.hpp"

namespace sarlab {

using nn::Batch;
using nn::Model;
using nn::Phase;
using nn::Tape;

double evaluate_accuracy(Model<float>& model, const Corpus& test, int batch_size) {
    if (test.empty()) throw ArgumentError("evaluate_accuracy: empty test set");
    const std::vector<int> pred = predict_labels(model, test, batch_size);
    size_t correct = 0;
    for (size_t i = 0; i < test.size(); ++i) correct += pred[i] == test[i].label;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<FeatureMap> capture_stage_features(Model<float>& model, const Corpus& corpus,
                                               int stage, int batch_size) {
    if (corpus.empty()) throw ArgumentError("capture_stage_features: empty corpus");
    if (stage < 1 || stage > nn::ModelConfig::kStages)
        throw ConfigurationError("capture_stage_features: no features recorded for stage " +
                                 std::to_string(stage));
    const auto [fh, fw] = model.stage_size(stage);
    const int fc = model.stage_channels(stage);
    const size_t per = static_cast<size_t>(fc) * fh * fw;

    std::vector<size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<FeatureMap> maps(corpus.size());
    Tape<float> tape;
    for (size_t begin = 0; begin < corpus.size(); begin += batch_size) {
        const size_t end = std::min(corpus.size(), begin + static_cast<size_t>(batch_size));
        Batch<float> batch = make_batch(corpus, order, begin, end, false);
        tape.reset();
        auto res = model.forward(tape, batch, Phase::Eval, 0.0f, false);
        const auto& fv = tape.val(res.stage_out[stage - 1]);
        for (size_t i = begin; i < end; ++i) {
            FeatureMap& m = maps[i];
            m.channels = fc;
            m.width = fw;
            m.height = fh;
            m.stage = stage;
            m.data.assign(fv.begin() + (i - begin) * per, fv.begin() + (i - begin + 1) * per);
        }
    }
    return maps;
}

FeatureScrStat corpus_feature_scr(Model<float>& model, const Corpus& corpus, int stage,
                                  int batch_size) {
    const std::vector<FeatureMap> maps = capture_stage_features(model, corpus, stage, batch_size);
    FeatureScrStat stat;
    double sum = 0.0;
    for (size_t i = 0; i < corpus.size(); ++i) {
        const StageMasks sm = downsample_masks(corpus[i].target_mask, corpus[i].shadow_mask,
                                               maps[i].width, maps[i].height);
        const double v = feature_scr(maps[i], sm.m_t, sm.m_c);
        ++stat.n;
        if (std::isinf(v)) {
            ++stat.n_inf;
        } else {
            sum += v;
        }
    }
    const int finite = stat.n - stat.n_inf;
    stat.mean = finite > 0 ? sum / finite : std::numeric_limits<double>::quiet_NaN();
    return stat;
}

ScrCurve scr_curve(Model<float>& model, const ScrSweep& sweep, int stage, int batch_size) {
    if (sweep.sets.empty() || sweep.sets.size() != sweep.deltas_db.size())
        throw ArgumentError("scr_curve: malformed sweep");
    if (stage < 1 || stage > nn::ModelConfig::kStages)
        throw ConfigurationError("scr_curve: no features recorded for stage " +
                                 std::to_string(stage));
    ScrCurve curve;
    curve.stage = stage;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double acc0 = nan, acc_m3 = nan, acc_p3 = nan;
    for (size_t k = 0; k < sweep.sets.size(); ++k) {
        ScrCurvePoint pt;
        pt.delta_db = sweep.deltas_db[k];
        pt.accuracy = evaluate_accuracy(model, sweep.sets[k], batch_size);
        const FeatureScrStat stat = corpus_feature_scr(model, sweep.sets[k], stage, batch_size);
        pt.mean_feature_scr = stat.mean;
        pt.n_inf = stat.n_inf;
        curve.points.push_back(pt);
        if (std::abs(pt.delta_db) < 1e-9) acc0 = pt.accuracy;
        if (std::abs(pt.delta_db + 3.0) < 1e-9) acc_m3 = pt.accuracy;
        if (std::abs(pt.delta_db - 3.0) < 1e-9) acc_p3 = pt.accuracy;
    }
    curve.dacc_0_minus3 = acc0 - acc_m3;
    curve.dacc_0_plus3 = acc0 - acc_p3;
    return curve;
}

void AttributionParams::validate() const {
    if (grid < 1) throw ArgumentError("AttributionParams: grid must be >= 1");
    if (budget < 1) throw ArgumentError("AttributionParams: budget must be >= 1");
    if (!(fill >= 0.0 && fill <= 1.0))
        throw ArgumentError("AttributionParams: fill must be in [0,1]");
}

double corpus_clutter_mean(const Corpus& corpus) {
    if (corpus.empty()) throw ArgumentError("corpus_clutter_mean: empty corpus");
    double sum = 0.0;
    size_t n = 0;
    for (const SarChip& chip : corpus) {
        const Mask m_c = clutter_mask(chip.target_mask, chip.shadow_mask);
        for (size_t i = 0; i < m_c.size(); ++i) {
            if (m_c[i] != 0) {
                sum += chip.amplitude[i];
                ++n;
            }
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace {

// Probability of class `label` for each image in `images` (flattened batch).
std::vector<double> class_prob_batch(Model<float>& model, const std::vector<float>& images,
                                     int count, int h, int w, int label, int batch_size) {
    std::vector<double> out(count);
    const size_t plane = static_cast<size_t>(h) * w;
    Tape<float> tape;
    for (int begin = 0; begin < count; begin += batch_size) {
        const int end = std::min(count, begin + batch_size);
        Batch<float> b;
        b.b = end - begin;
        b.h = h;
        b.w = w;
        b.images.assign(images.begin() + begin * plane, images.begin() + end * plane);
        tape.reset();
        auto res = model.forward(tape, b, Phase::Eval, 0.0f, false);
        const auto& logp = tape.val(res.logp_cls);
        const int k = model.config().num_classes;
        for (int n = 0; n < b.b; ++n) out[begin + n] = std::exp(logp[n * k + label]);
    }
    return out;
}

}  // namespace

AttributionReport attribute(Model<float>& model, const SarChip& chip,
                            const AttributionParams& params) {
    params.validate();
    const int h = chip.amplitude.height(), w = chip.amplitude.width();
    if (h % params.grid != 0 || w % params.grid != 0)
        throw ArgumentError("attribute: chip size not divisible by superpixel grid");
    if (count_set(chip.target_mask) == 0)
        throw ArgumentError("attribute: chip has no target mask");
    const int n_sp = params.grid * params.grid;
    const int walks = params.budget / (n_sp + 1);
    if (walks < 2)
        throw ArgumentError("attribute: budget allows fewer than 2 coalitions per superpixel");

    const int cell_h = h / params.grid, cell_w = w / params.grid;
    const size_t plane = static_cast<size_t>(h) * w;
    const Prediction base = infer(model, chip.amplitude);

    auto fill_cell = [&](std::vector<float>& img, int sp, bool reveal) {
        const int gy = sp / params.grid, gx = sp % params.grid;
        for (int y = gy * cell_h; y < (gy + 1) * cell_h; ++y)
            for (int x = gx * cell_w; x < (gx + 1) * cell_w; ++x)
                img[static_cast<size_t>(y) * w + x] =
                    reveal ? chip.amplitude.at(x, y) : static_cast<float>(params.fill);
    };

    std::vector<double> phi(n_sp, 0.0);
    int samples = 0;
    for (int walk = 0; walk < walks; ++walk) {
        std::vector<int> perm(n_sp);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(derive_seed(params.seed, static_cast<uint64_t>(walk)));
        std::shuffle(perm.begin(), perm.end(), rng.engine());

        // One walk = the all-occluded image plus n_sp incremental reveals.
        std::vector<float> stacked((n_sp + 1) * plane);
        std::vector<float> current(plane, static_cast<float>(params.fill));
        std::copy(current.begin(), current.end(), stacked.begin());
        for (int k = 0; k < n_sp; ++k) {
            fill_cell(current, perm[k], true);
            std::copy(current.begin(), current.end(), stacked.begin() + (k + 1) * plane);
        }
        const std::vector<double> v =
            class_prob_batch(model, stacked, n_sp + 1, h, w, base.label, 64);
        samples += n_sp + 1;
        for (int k = 0; k < n_sp; ++k) phi[perm[k]] += v[k + 1] - v[k];
    }
    for (double& p : phi) p /= walks;

    AttributionReport rep;
    rep.method = "mc-permutation-shapley";
    rep.samples = samples;
    rep.fill = params.fill;

    double t_sum = 0, s_sum = 0, c_sum = 0, total = 0;
    for (int sp = 0; sp < n_sp; ++sp) {
        const int gy = sp / params.grid, gx = sp % params.grid;
        int nt = 0, ns = 0, nc = 0;
        for (int y = gy * cell_h; y < (gy + 1) * cell_h; ++y)
            for (int x = gx * cell_w; x < (gx + 1) * cell_w; ++x) {
                if (chip.target_mask.at(x, y)) {
                    ++nt;
                } else if (chip.shadow_mask.at(x, y)) {
                    ++ns;
                } else {
                    ++nc;
                }
            }
        const double a = std::abs(phi[sp]);
        const double cell = static_cast<double>(nt + ns + nc);
        t_sum += a * nt / cell;
        s_sum += a * ns / cell;
        c_sum += a * nc / cell;
        total += a;
    }
    if (total < 1e-12) {
        rep.degenerate = true;
        rep.target_share = rep.shadow_share = rep.clutter_share = 1.0 / 3.0;
    } else {
        const double norm = t_sum + s_sum + c_sum;
        rep.target_share = t_sum / norm;
        rep.shadow_share = s_sum / norm;
        rep.clutter_share = c_sum / norm;
    }

    if (params.emit_map) {
        rep.db_map = Image(w, h, -40.0f);
        double max_a = 0.0;
        for (double p : phi) max_a = std::max(max_a, std::abs(p));
        if (max_a > 0.0) {
            for (int sp = 0; sp < n_sp; ++sp) {
                const double db =
                    std::max(-40.0, 20.0 * std::log10(std::abs(phi[sp]) / max_a + 1e-300));
                const int gy = sp / params.grid, gx = sp % params.grid;
                for (int y = gy * cell_h; y < (gy + 1) * cell_h; ++y)
                    for (int x = gx * cell_w; x < (gx + 1) * cell_w; ++x)
                        rep.db_map.at(x, y) = static_cast<float>(db);
            }
        }
    }
    return rep;
}

AttributionReport attribute_corpus(Model<float>& model, const Corpus& corpus,
                                   const AttributionParams& params) {
    if (corpus.empty()) throw ArgumentError("attribute_corpus: empty corpus");
    AttributionReport mean;
    mean.method = "mc-permutation-shapley";
    mean.fill = params.fill;
    int degenerate = 0;
    for (size_t i = 0; i < corpus.size(); ++i) {
        AttributionParams p = params;
        p.seed = derive_seed(params.seed, i);
        p.emit_map = false;
        const AttributionReport r = attribute(model, corpus[i], p);
        mean.target_share += r.target_share;
        mean.shadow_share += r.shadow_share;
        mean.clutter_share += r.clutter_share;
        mean.samples += r.samples;
        degenerate += r.degenerate;
    }
    const double n = static_cast<double>(corpus.size());
    mean.target_share /= n;
    mean.shadow_share /= n;
    mean.clutter_share /= n;
    mean.degenerate = degenerate == static_cast<int>(corpus.size());
    return mean;
}

std::vector<AblationConfig> default_ablation_grid() {
    // Rows: plain CNN; adversarial only; loss/branch subsets; full model.
    return {
        {false, false, false, false, false, "cnn"},
        {false, false, false, false, true, "cnn+adv"},
        {false, false, true, true, true, "losses+adv"},
        {true, false, true, false, true, "target+adv"},
        {false, true, false, true, true, "shadow+adv"},
        {true, true, false, false, true, "branches+adv"},
        {true, true, true, false, true, "branches+lt+adv"},
        {true, true, false, true, true, "branches+ls+adv"},
        {true, true, true, true, false, "crm-only"},
        {true, true, true, true, true, "full"},
    };
}

AblationTable run_ablation(const std::vector<AblationConfig>& grid, const Corpus& d_syn,
                           const Corpus& d_aug, const Corpus& test, const TrainConfig& base,
                           const std::vector<uint64_t>& seeds) {
    if (seeds.empty()) throw ArgumentError("run_ablation: need at least one seed");
    AblationTable table;
    int plain_row = -1;
    for (size_t r = 0; r < grid.size(); ++r) {
        const AblationConfig& g = grid[r];
        AblationRow row;
        row.config = g;
        for (uint64_t seed : seeds) {
            TrainConfig cfg = base;
            cfg.model.use_f_t = g.use_f_t;
            cfg.model.use_f_s = g.use_f_s;
            cfg.model.use_l_t = g.use_l_t;
            cfg.model.use_l_s = g.use_l_s;
            cfg.model.use_adv = g.use_adv;
            cfg.seed = seed;
            TrainedModel tm = train(d_syn, d_aug, cfg);
            row.per_seed.push_back(evaluate_accuracy(*tm.model, test, base.batch_size));
        }
        row.mean_accuracy = std::accumulate(row.per_seed.begin(), row.per_seed.end(), 0.0) /
                            static_cast<double>(row.per_seed.size());
        if (!g.use_f_t && !g.use_f_s && !g.use_l_t && !g.use_l_s && !g.use_adv && plain_row < 0)
            plain_row = static_cast<int>(r);
        table.rows.push_back(std::move(row));
    }
    table.has_plain_row = plain_row >= 0;
    if (table.has_plain_row) {
        const double plain = table.rows[plain_row].mean_accuracy;
        for (AblationRow& row : table.rows) row.delta_vs_plain = row.mean_accuracy - plain;
    }
    return table;
}

}  // namespace sarlab
