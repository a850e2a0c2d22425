#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sarlab/nn/model.hpp"
#include "testutil.hpp"

using namespace sarlab;
using namespace sarlab::nn;
using sarlab::testutil::random_batch;

namespace {

ModelConfig tiny(bool f_t, bool f_s, bool l_t, bool l_s, bool adv) {
    ModelConfig c;
    c.in_height = c.in_width = 32;
    c.c1 = 4;
    c.c2 = 6;
    c.num_classes = 3;
    c.disc_hidden = 4;
    c.use_f_t = f_t;
    c.use_f_s = f_s;
    c.use_l_t = l_t;
    c.use_l_s = l_s;
    c.use_adv = adv;
    return c;
}

float max_rel_diff(const std::vector<float>& a, const std::vector<float>& b, float scale) {
    REQUIRE(a.size() == b.size());
    float worst = 0.0f;
    for (size_t i = 0; i < a.size(); ++i) {
        const float denom = std::max({1e-4f, std::abs(a[i]), std::abs(b[i])});
        worst = std::max(worst, std::abs(a[i] * scale - b[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("stage geometry halves twice from the input") {
    Model<float> m(tiny(true, true, true, true, true), 1);
    CHECK(m.stage_size(1) == std::pair<int, int>{16, 16});
    CHECK(m.stage_size(2) == std::pair<int, int>{8, 8});
    CHECK(m.stage_channels(1) == 4);
    CHECK(m.stage_channels(2) == 6);
}

TEST_CASE("toggles control which parameter blocks exist") {
    SUBCASE("plain cnn has neither branches nor encoder") {
        Model<float> m(tiny(false, false, false, false, false), 1);
        CHECK(m.params().find("f.crm1.attn.w") == nullptr);
        CHECK(m.params().find("f.crm1.tm1.conv.w") == nullptr);
        CHECK(m.params().find("m.stem.conv.w") == nullptr);
        CHECK(m.params().find("y.fc.w") != nullptr);
        // The adversarial head always exists; the gradient gate is the GRL.
        CHECK(m.params().find("d.fc1.w") != nullptr);
    }
    SUBCASE("positional losses alone bring the encoder but no F_IN' reduction") {
        Model<float> m(tiny(false, false, true, true, false), 1);
        CHECK(m.params().find("f.crm1.tm1.conv.w") != nullptr);
        CHECK(m.params().find("f.crm1.inp.conv.w") == nullptr);
        CHECK(m.params().find("m.stem.conv.w") != nullptr);
    }
    SUBCASE("region gating brings the F_IN' reduction") {
        Model<float> m(tiny(true, true, false, false, false), 1);
        CHECK(m.params().find("f.crm2.inp.conv.w") != nullptr);
        CHECK(m.params().find("m.stem.conv.w") == nullptr);
    }
}

TEST_CASE("parameter names map onto their update groups") {
    Model<float> m(tiny(true, true, true, true, true), 1);
    for (Param<float>* p : m.params().all()) {
        Group expect;
        switch (p->name[0]) {
            case 'f': expect = Group::Feature; break;
            case 'y': expect = Group::Classifier; break;
            case 'd': expect = Group::Discriminator; break;
            case 'm': expect = Group::MaskEncoder; break;
            default: FAIL("unexpected parameter prefix in " << p->name); continue;
        }
        CHECK(p->group == expect);
    }
    CHECK_FALSE(m.params().group(Group::Feature).empty());
    CHECK_FALSE(m.params().group(Group::Classifier).empty());
    CHECK_FALSE(m.params().group(Group::Discriminator).empty());
    CHECK_FALSE(m.params().group(Group::MaskEncoder).empty());
}

TEST_CASE("constant attention rescales the stage outputs by its bias") {
    // With zeroed attention weights and bias beta, z_s is the constant beta, so
    // each CRM stage must emit beta * F_IN. Per-channel normalisation erases
    // the scale between stages, making the backbone positively homogeneous;
    // the plain-CNN twin with identical layer seeds provides the reference.
    const float beta = 0.7f;
    Model<float> plain(tiny(false, false, false, false, false), 5);
    Model<float> gated(tiny(true, true, false, false, false), 5);
    for (int s = 1; s <= 2; ++s) {
        std::string base = "f.crm" + std::to_string(s);
        Param<float>* w = gated.params().find(base + ".attn.w");
        Param<float>* b = gated.params().find(base + ".attn.b");
        REQUIRE(w != nullptr);
        REQUIRE(b != nullptr);
        std::fill(w->value.begin(), w->value.end(), 0.0f);
        std::fill(b->value.begin(), b->value.end(), beta);
    }
    Batch<float> batch = random_batch<float>(3, 32, 32, 3, 42, false);
    Tape<float> ta, tb;
    auto ra = plain.forward(ta, batch, Phase::Train, 0.0f, false);
    auto rb = gated.forward(tb, batch, Phase::Train, 0.0f, false);
    CHECK(max_rel_diff(ta.val(ra.stage_out[0]), tb.val(rb.stage_out[0]), beta) < 1e-3f);
    CHECK(max_rel_diff(ta.val(ra.stage_out[1]), tb.val(rb.stage_out[1]), beta) < 1e-3f);
    CHECK(max_rel_diff(ta.val(ra.features), tb.val(rb.features), beta) < 1e-3f);
    // Zero classifier bias makes the logits inherit the same scale.
    CHECK(max_rel_diff(ta.val(ra.logits_cls), tb.val(rb.logits_cls), beta) < 1e-3f);
}

TEST_CASE("attention output is nonnegative") {
    Model<float> m(tiny(true, true, true, true, true), 9);
    Batch<float> batch = random_batch<float>(2, 32, 32, 3, 43, true);
    Tape<float> t;
    auto r = m.forward(t, batch, Phase::Train, 0.5f, true);
    for (Tape<float>::Var v : r.stage_out)
        for (float x : t.val(v)) CHECK(x >= 0.0f);
    for (Tape<float>::Var v : {r.stage_ztm[0], r.stage_ztm[1], r.stage_zsm[0], r.stage_zsm[1]})
        for (float x : t.val(v)) CHECK(x >= 0.0f);
}

TEST_CASE("mask-free inference equals the training value path bit-for-bit") {
    ModelConfig cfg = tiny(true, true, true, true, true);
    Batch<float> with_masks = random_batch<float>(3, 32, 32, 3, 44, true);
    Batch<float> without = with_masks;
    without.m_t.clear();
    without.m_s.clear();
    SUBCASE("training phase") {
        Model<float> m1(cfg, 7), m2(cfg, 7);
        Tape<float> t1, t2;
        auto r1 = m1.forward(t1, with_masks, Phase::Train, 0.3f, true);
        auto r2 = m2.forward(t2, without, Phase::Train, 0.3f, false);
        CHECK(t1.val(r1.logits_cls) == t2.val(r2.logits_cls));
        CHECK(t1.val(r1.logits_dom) == t2.val(r2.logits_dom));
        CHECK(t1.val(r1.features) == t2.val(r2.features));
    }
    SUBCASE("eval phase") {
        Model<float> m1(cfg, 7), m2(cfg, 7);
        Tape<float> t1, t2;
        auto r1 = m1.forward(t1, with_masks, Phase::Eval, 0.0f, true);
        auto r2 = m2.forward(t2, without, Phase::Eval, 0.0f, false);
        CHECK(t1.val(r1.logits_cls) == t2.val(r2.logits_cls));
        CHECK(t1.val(r1.features) == t2.val(r2.features));
        REQUIRE(r1.mask_loss_t.size() == 2);
        CHECK(r1.mask_loss_t[0] >= 0);  // losses exist on the mask path
        CHECK(r2.mask_loss_t[0] == -1);  // and are absent without masks
    }
}

TEST_CASE("forward contract violations throw") {
    Batch<float> batch = random_batch<float>(2, 32, 32, 3, 45, true);
    SUBCASE("mask losses need the encoder") {
        Model<float> m(tiny(false, false, false, false, true), 1);
        Tape<float> t;
        CHECK_THROWS_AS(m.forward(t, batch, Phase::Train, 0.0f, true), ContractError);
    }
    SUBCASE("mask losses need masks") {
        Model<float> m(tiny(true, true, true, true, true), 1);
        Batch<float> no_masks = batch;
        no_masks.m_t.clear();
        no_masks.m_s.clear();
        Tape<float> t;
        CHECK_THROWS_AS(m.forward(t, no_masks, Phase::Train, 0.0f, true), ContractError);
    }
    SUBCASE("batch spatial size must match the config") {
        Model<float> m(tiny(true, true, true, true, true), 1);
        Batch<float> wrong = random_batch<float>(2, 16, 16, 3, 46, true);
        Tape<float> t;
        CHECK_THROWS_AS(m.forward(t, wrong, Phase::Train, 0.0f, false), ConfigurationError);
    }
}

TEST_CASE("config validation rejects bad geometry") {
    ModelConfig c = tiny(true, true, true, true, true);
    c.in_height = 30;  // not divisible by the stage strides
    CHECK_THROWS_AS((Model<float>{c, 1}), ConfigurationError);
    c = tiny(true, true, true, true, true);
    c.num_classes = 1;
    CHECK_THROWS_AS((Model<float>{c, 1}), ConfigurationError);
}

TEST_CASE("mask losses appear per stage exactly for the enabled sides") {
    Batch<float> batch = random_batch<float>(2, 32, 32, 3, 47, true);
    SUBCASE("target loss only") {
        Model<float> m(tiny(true, true, true, false, false), 1);
        Tape<float> t;
        auto r = m.forward(t, batch, Phase::Train, 0.0f, true);
        CHECK(r.mask_loss_t[0] >= 0);
        CHECK(r.mask_loss_t[1] >= 0);
        CHECK(r.mask_loss_s[0] == -1);
        CHECK(r.mask_loss_s[1] == -1);
    }
    SUBCASE("shadow loss only") {
        Model<float> m(tiny(true, true, false, true, false), 1);
        Tape<float> t;
        auto r = m.forward(t, batch, Phase::Train, 0.0f, true);
        CHECK(r.mask_loss_t[0] == -1);
        CHECK(r.mask_loss_s[0] >= 0);
    }
}
