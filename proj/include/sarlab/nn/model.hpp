#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sarlab/nn/tape.hpp"

namespace sarlab::nn {

// Two downsampling stages, each followed by a clutter-reduction block when
// enabled. The ablation toggles select which CRM pieces exist:
//   all off                -> plain CNN
//   use_adv only           -> plain CNN + adversarial head via GRL
//   any CRM toggle on      -> CRM present at both stages
struct ModelConfig {
    int in_height = 64, in_width = 64;
    int c1 = 16, c2 = 32;       // stage channel widths
    int num_classes = 10;
    int num_domains = 2;
    int disc_hidden = 32;
    bool use_f_t = true;        // gate target branch through F_IN' product
    bool use_f_s = true;        // gate shadow branch through F_IN' product
    bool use_l_t = true;        // target-mask positional loss
    bool use_l_s = true;        // shadow-mask positional loss
    bool use_adv = true;        // domain-adversarial head

    static constexpr int kStages = 2;

    bool crm_enabled() const { return use_f_t || use_f_s || use_l_t || use_l_s; }
    bool mask_encoder_enabled() const { return use_l_t || use_l_s; }

    void validate() const {
        if (in_height % 4 != 0 || in_width % 4 != 0)
            throw ConfigurationError("ModelConfig: input size must be divisible by stage strides");
        if (c1 < 1 || c2 < 1 || num_classes < 2 || num_domains < 2 || disc_hidden < 1)
            throw ConfigurationError("ModelConfig: bad layer sizes");
    }

    bool operator==(const ModelConfig&) const = default;
};

enum class Phase { Train, Eval };

template <typename T>
struct Batch {
    int b = 0;
    int h = 0, w = 0;
    std::vector<T> images;      // B*1*H*W
    std::vector<int> labels;    // class ids, may be empty for pure inference
    std::vector<int> domains;   // 0-based domain ids for the adversarial head
    std::vector<T> m_t, m_s;    // B*1*H*W each, empty when masks absent

    bool has_masks() const { return !m_t.empty() && !m_s.empty(); }
};

// conv -> batchnorm -> ReLU with externally owned parameters; the building
// block shared by the backbone, CRM branches, and the mask encoder.
template <typename T>
typename Tape<T>::Var conv_bn_relu(Tape<T>& tape, typename Tape<T>::Var x, Param<T>& w,
                                   Param<T>& b, Param<T>& gamma, Param<T>& beta,
                                   Param<T>& run_mean, Param<T>& run_var, int stride, int pad,
                                   bool training) {
    auto y = tape.conv2d(x, tape.leaf(w), tape.leaf(b), stride, pad);
    y = tape.batchnorm(y, tape.leaf(gamma), tape.leaf(beta), run_mean.value, run_var.value,
                       training);
    return tape.relu(y);
}

template <typename T>
struct ForwardResult {
    using Var = typename Tape<T>::Var;
    Var logits_cls = -1, logp_cls = -1;
    Var logits_dom = -1, logp_dom = -1;
    Var features = -1;                    // pooled representation fed to both heads
    std::vector<Var> stage_out;           // clutter-reduced map per stage
    std::vector<Var> stage_ztm, stage_zsm;  // branch outputs per stage (-1 when absent)
    std::vector<Var> mask_loss_t, mask_loss_s;  // per-stage losses (-1 when absent)
    std::vector<uint8_t> mask_degenerate;       // per-sample flags from h normalization
};

template <typename T>
class Model {
public:
    using Var = typename Tape<T>::Var;

    Model(ModelConfig cfg, uint64_t init_seed) : cfg_(cfg) {
        cfg_.validate();
        build(init_seed);
    }

    const ModelConfig& config() const { return cfg_; }
    ParamStore<T>& params() { return store_; }

    // Spatial size of stage l (1-based) feature maps.
    std::pair<int, int> stage_size(int stage) const {
        if (stage < 1 || stage > ModelConfig::kStages)
            throw ConfigurationError("stage out of range: " + std::to_string(stage));
        const int div = stage == 1 ? 2 : 4;
        return {cfg_.in_height / div, cfg_.in_width / div};
    }
    int stage_channels(int stage) const { return stage == 1 ? cfg_.c1 : cfg_.c2; }

    ForwardResult<T> forward(Tape<T>& tape, const Batch<T>& batch, Phase phase, T grl_lambda,
                             bool with_mask_losses) {
        if (batch.b <= 0) throw ArgumentError("forward: empty batch");
        if (batch.h != cfg_.in_height || batch.w != cfg_.in_width)
            throw ConfigurationError("forward: batch size " + std::to_string(batch.w) + "x" +
                                     std::to_string(batch.h) + " does not match config");
        if (with_mask_losses && !cfg_.mask_encoder_enabled())
            throw ContractError("forward: mask losses requested but encoder disabled");
        if (with_mask_losses && !batch.has_masks())
            throw ContractError("forward: training mode requires masks");
        const bool training = phase == Phase::Train;

        ForwardResult<T> res;
        Var x = tape.input(Shape4{batch.b, 1, batch.h, batch.w}, batch.images);

        // Mask encodings first (value path must not depend on them).
        std::vector<Var> h_t(ModelConfig::kStages, -1), h_s(ModelConfig::kStages, -1);
        if (with_mask_losses) {
            Var mt = tape.input(Shape4{batch.b, 1, batch.h, batch.w}, batch.m_t);
            Var ms = tape.input(Shape4{batch.b, 1, batch.h, batch.w}, batch.m_s);
            encode_mask(tape, mt, training, h_t);
            encode_mask(tape, ms, training, h_s);
        }

        Var f = block(tape, x, stem_, 2, 2, training);
        f = block(tape, f, s1_, 1, 1, training);
        res = attach_crm(tape, res, f, 0, h_t[0], h_s[0], training, with_mask_losses);
        f = res.stage_out[0];
        f = block(tape, f, down_, 2, 1, training);
        f = block(tape, f, s2_, 1, 1, training);
        res = attach_crm(tape, res, f, 1, h_t[1], h_s[1], training, with_mask_losses);
        f = res.stage_out[1];

        res.features = tape.global_avg_pool(f);
        res.logits_cls = tape.linear(res.features, tape.leaf(*cls_w_), tape.leaf(*cls_b_));
        res.logp_cls = tape.log_softmax(res.logits_cls);

        Var d = tape.grl(res.features, cfg_.use_adv ? grl_lambda : T(0));
        d = tape.linear(d, tape.leaf(*disc_w1_), tape.leaf(*disc_b1_));
        d = tape.relu(d);
        res.logits_dom = tape.linear(d, tape.leaf(*disc_w2_), tape.leaf(*disc_b2_));
        res.logp_dom = tape.log_softmax(res.logits_dom);
        return res;
    }

private:
    struct ConvBnLayer {
        Param<T>*w = nullptr, *b = nullptr, *gamma = nullptr, *beta = nullptr,
               *rmean = nullptr, *rvar = nullptr;
    };
    struct CrmStage {
        std::vector<ConvBnLayer> tm, sm;  // 3 blocks each
        ConvBnLayer inp;                  // 1x1 reduction producing F_IN'
        Param<T>*attn_w = nullptr, *attn_b = nullptr;
    };

    ModelConfig cfg_;
    ParamStore<T> store_;
    uint64_t init_seed_ = 0;

    ConvBnLayer stem_, s1_, down_, s2_;
    CrmStage crm_[ModelConfig::kStages];
    ConvBnLayer enc_stem_, enc_s1_, enc_down_, enc_s2_;
    Param<T>*cls_w_ = nullptr, *cls_b_ = nullptr;
    Param<T>*disc_w1_ = nullptr, *disc_b1_ = nullptr, *disc_w2_ = nullptr, *disc_b2_ = nullptr;

    void init_normal(Param<T>& p, double stddev) {
        Rng rng(derive_seed(init_seed_, p.name));
        for (auto& v : p.value) v = static_cast<T>(rng.normal(0.0, stddev));
    }

    ConvBnLayer make_conv_bn(const std::string& name, int cin, int cout, int k, Group g) {
        ConvBnLayer l;
        l.w = &store_.add(name + ".conv.w", Shape4{cout, cin, k, k}, g);
        l.b = &store_.add(name + ".conv.b", Shape4{1, cout, 1, 1}, g);
        l.gamma = &store_.add(name + ".bn.gamma", Shape4{1, cout, 1, 1}, g);
        l.beta = &store_.add(name + ".bn.beta", Shape4{1, cout, 1, 1}, g);
        l.rmean = &store_.add(name + ".bn.run_mean", Shape4{1, cout, 1, 1}, g, false);
        l.rvar = &store_.add(name + ".bn.run_var", Shape4{1, cout, 1, 1}, g, false);
        init_normal(*l.w, std::sqrt(2.0 / (static_cast<double>(cin) * k * k)));
        std::fill(l.gamma->value.begin(), l.gamma->value.end(), T(1));
        std::fill(l.rvar->value.begin(), l.rvar->value.end(), T(1));
        return l;
    }

    Param<T>* make_linear_w(const std::string& name, int in, int out, Group g) {
        Param<T>& p = store_.add(name, Shape4{out, in, 1, 1}, g);
        init_normal(p, std::sqrt(2.0 / static_cast<double>(in)));
        return &p;
    }

    void build(uint64_t init_seed) {
        init_seed_ = init_seed;
        stem_ = make_conv_bn("f.stem", 1, cfg_.c1, 5, Group::Feature);
        s1_ = make_conv_bn("f.s1", cfg_.c1, cfg_.c1, 3, Group::Feature);
        down_ = make_conv_bn("f.down", cfg_.c1, cfg_.c2, 3, Group::Feature);
        s2_ = make_conv_bn("f.s2", cfg_.c2, cfg_.c2, 3, Group::Feature);

        if (cfg_.crm_enabled()) {
            for (int s = 0; s < ModelConfig::kStages; ++s) {
                const int c = s == 0 ? cfg_.c1 : cfg_.c2;
                const std::string base = "f.crm" + std::to_string(s + 1);
                for (int i = 0; i < 3; ++i) {
                    crm_[s].tm.push_back(
                        make_conv_bn(base + ".tm" + std::to_string(i + 1), c, c, 5, Group::Feature));
                    crm_[s].sm.push_back(
                        make_conv_bn(base + ".sm" + std::to_string(i + 1), c, c, 5, Group::Feature));
                }
                if (cfg_.use_f_t || cfg_.use_f_s)
                    crm_[s].inp = make_conv_bn(base + ".inp", c, c, 1, Group::Feature);
                crm_[s].attn_w = &store_.add(base + ".attn.w", Shape4{c, 2 * c, 3, 3},
                                             Group::Feature);
                crm_[s].attn_b = &store_.add(base + ".attn.b", Shape4{1, c, 1, 1}, Group::Feature);
                init_normal(*crm_[s].attn_w, std::sqrt(2.0 / (2.0 * c * 9.0)));
            }
        }

        cls_w_ = make_linear_w("y.fc.w", cfg_.c2, cfg_.num_classes, Group::Classifier);
        cls_b_ = &store_.add("y.fc.b", Shape4{1, cfg_.num_classes, 1, 1}, Group::Classifier);
        disc_w1_ = make_linear_w("d.fc1.w", cfg_.c2, cfg_.disc_hidden, Group::Discriminator);
        disc_b1_ = &store_.add("d.fc1.b", Shape4{1, cfg_.disc_hidden, 1, 1}, Group::Discriminator);
        disc_w2_ = make_linear_w("d.fc2.w", cfg_.disc_hidden, cfg_.num_domains,
                                 Group::Discriminator);
        disc_b2_ = &store_.add("d.fc2.b", Shape4{1, cfg_.num_domains, 1, 1},
                               Group::Discriminator);

        if (cfg_.mask_encoder_enabled()) {
            enc_stem_ = make_conv_bn("m.stem", 1, cfg_.c1, 5, Group::MaskEncoder);
            enc_s1_ = make_conv_bn("m.s1", cfg_.c1, cfg_.c1, 3, Group::MaskEncoder);
            enc_down_ = make_conv_bn("m.down", cfg_.c1, cfg_.c2, 3, Group::MaskEncoder);
            enc_s2_ = make_conv_bn("m.s2", cfg_.c2, cfg_.c2, 3, Group::MaskEncoder);
        }
    }

    Var block(Tape<T>& tape, Var x, ConvBnLayer& l, int stride, int pad, bool training) {
        return conv_bn_relu(tape, x, *l.w, *l.b, *l.gamma, *l.beta, *l.rmean, *l.rvar, stride,
                            pad, training);
    }

    // The mask encoder mirrors the backbone's stem/stage structure with
    // independent parameters, shared between the target and shadow masks.
    void encode_mask(Tape<T>& tape, Var m, bool training, std::vector<Var>& out) {
        Var h = block(tape, m, enc_stem_, 2, 2, training);
        h = block(tape, h, enc_s1_, 1, 1, training);
        out[0] = h;
        h = block(tape, h, enc_down_, 2, 1, training);
        h = block(tape, h, enc_s2_, 1, 1, training);
        out[1] = h;
    }

    ForwardResult<T> attach_crm(Tape<T>& tape, ForwardResult<T> res, Var f_in, int s, Var h_t,
                                Var h_s, bool training, bool with_mask_losses) {
        if (!cfg_.crm_enabled()) {
            res.stage_out.push_back(f_in);
            res.stage_ztm.push_back(-1);
            res.stage_zsm.push_back(-1);
            res.mask_loss_t.push_back(-1);
            res.mask_loss_s.push_back(-1);
            return res;
        }
        CrmStage& cs = crm_[s];
        Var f_tm = f_in, f_sm = f_in;
        for (int i = 0; i < 3; ++i) {
            f_tm = block(tape, f_tm, cs.tm[i], 1, 2, training);
            f_sm = block(tape, f_sm, cs.sm[i], 1, 2, training);
        }
        res.stage_ztm.push_back(f_tm);
        res.stage_zsm.push_back(f_sm);

        Var f_t = f_tm, f_s = f_sm;
        if (cfg_.use_f_t || cfg_.use_f_s) {
            Var f_in_prime = block(tape, f_in, cs.inp, 1, 0, training);
            if (cfg_.use_f_t) f_t = tape.relu(tape.mul(f_tm, f_in_prime));
            if (cfg_.use_f_s) f_s = tape.relu(tape.mul(f_sm, f_in_prime));
        }

        Var cat = tape.concat_channels(f_t, f_s);
        Var a = tape.conv2d(cat, tape.leaf(*cs.attn_w), tape.leaf(*cs.attn_b), 1, 1);
        a = tape.relu(a);
        Var z_s = tape.channel_mean(a);
        res.stage_out.push_back(tape.broadcast_mul(z_s, f_in));

        if (with_mask_losses && cfg_.use_l_t && h_t >= 0) {
            std::vector<uint8_t> degen;
            Var h_norm = tape.minmax_normalize(h_t, &degen);
            res.mask_loss_t.push_back(tape.mask_xent(f_tm, h_norm));
            merge_flags(res.mask_degenerate, degen);
        } else {
            res.mask_loss_t.push_back(-1);
        }
        if (with_mask_losses && cfg_.use_l_s && h_s >= 0) {
            std::vector<uint8_t> degen;
            Var h_norm = tape.minmax_normalize(h_s, &degen);
            res.mask_loss_s.push_back(tape.mask_xent(f_sm, h_norm));
            merge_flags(res.mask_degenerate, degen);
        } else {
            res.mask_loss_s.push_back(-1);
        }
        return res;
    }

    static void merge_flags(std::vector<uint8_t>& acc, const std::vector<uint8_t>& flags) {
        if (acc.empty()) acc.assign(flags.size(), 0);
        for (size_t i = 0; i < flags.size(); ++i) acc[i] |= flags[i];
    }
};

}  // namespace sarlab::nn
