// Python bindings for the sarlab core: chip rendering, SCR manipulation,
// segmentation, augmentation, training, inference, and attribution.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>

#include "sarlab/augment.hpp"
#include "sarlab/corpus_io.hpp"
#include "sarlab/evalkit.hpp"
#include "sarlab/nn/checkpoint.hpp"
#include "sarlab/scenario.hpp"
#include "sarlab/scr.hpp"
#include "sarlab/segmentation.hpp"
#include "sarlab/trainer.hpp"

namespace py = pybind11;
using namespace sarlab;

namespace {

py::array_t<float> image_to_np(const Image& img) {
    py::array_t<float> out({img.height(), img.width()});
    std::copy(img.data(), img.data() + img.size(), out.mutable_data());
    return out;
}

Image np_to_image(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw ArgumentError("expected a 2-D float array");
    Image img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::copy(arr.data(), arr.data() + arr.size(), img.data());
    return img;
}

py::array_t<uint8_t> mask_to_np(const Mask& m) {
    py::array_t<uint8_t> out({m.height(), m.width()});
    std::copy(m.data(), m.data() + m.size(), out.mutable_data());
    return out;
}

Mask np_to_mask(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw ArgumentError("expected a 2-D uint8 array");
    Mask m(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::copy(arr.data(), arr.data() + arr.size(), m.data());
    return m;
}

// Owns a trained or loaded network plus its training-step counter.
struct PyModel {
    std::unique_ptr<nn::Model<float>> model;
    int64_t step = 0;
    std::vector<EpochLog> log;
};

TrainConfig build_train_config(int epochs, double lr, int batch, double lambda_adv,
                               double lambda_mask, bool grl_ramp, uint64_t seed, int size, int c1,
                               int c2, int classes, bool f_t, bool f_s, bool l_t, bool l_s,
                               bool adv, const std::string& log_path) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.batch_size = batch;
    cfg.lambda_adv = lambda_adv;
    cfg.lambda_mask = lambda_mask;
    cfg.grl_ramp = grl_ramp;
    cfg.seed = seed;
    cfg.log_path = log_path;
    cfg.model.in_height = size;
    cfg.model.in_width = size;
    cfg.model.c1 = c1;
    cfg.model.c2 = c2;
    cfg.model.num_classes = classes;
    cfg.model.use_f_t = f_t;
    cfg.model.use_f_s = f_s;
    cfg.model.use_l_t = l_t;
    cfg.model.use_l_s = l_s;
    cfg.model.use_adv = adv;
    cfg.validate();
    return cfg;
}

py::dict epoch_log_to_dict(const EpochLog& e) {
    py::dict d;
    d["epoch"] = e.epoch;
    d["cls_loss"] = e.cls_loss;
    d["adv_loss"] = e.adv_loss;
    d["mask_loss"] = e.mask_loss;
    d["train_acc"] = e.train_acc;
    d["dom_acc"] = e.dom_acc;
    d["wall_s"] = e.wall_s;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "SAR chip laboratory: clutter-reduction and domain-invariant training";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<SarChip>(m, "SarChip")
        .def_property(
            "amplitude", [](const SarChip& c) { return image_to_np(c.amplitude); },
            [](SarChip& c, const py::array_t<float, py::array::c_style | py::array::forcecast>&
                               arr) { c.amplitude = np_to_image(arr); })
        .def_property(
            "target_mask", [](const SarChip& c) { return mask_to_np(c.target_mask); },
            [](SarChip& c, const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>&
                               arr) { c.target_mask = np_to_mask(arr); })
        .def_property(
            "shadow_mask", [](const SarChip& c) { return mask_to_np(c.shadow_mask); },
            [](SarChip& c, const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>&
                               arr) { c.shadow_mask = np_to_mask(arr); })
        .def_readwrite("label", &SarChip::label)
        .def_property(
            "domain", [](const SarChip& c) { return std::string(to_string(c.domain)); },
            [](SarChip& c, const std::string& s) { c.domain = domain_from_string(s); })
        .def_readonly("clipped", &SarChip::clipped)
        .def_readonly("composited", &SarChip::composited)
        .def_readonly("aug_fallback", &SarChip::aug_fallback)
        .def_property_readonly("seed", [](const SarChip& c) { return c.spec.seed; })
        .def_property_readonly("azimuth_deg", [](const SarChip& c) { return c.spec.azimuth_deg; })
        .def("__repr__", [](const SarChip& c) {
            return "<SarChip label=" + std::to_string(c.label) + " domain=" +
                   to_string(c.domain) + " " + std::to_string(c.amplitude.width()) + "x" +
                   std::to_string(c.amplitude.height()) + ">";
        });

    m.def(
        "render_chip",
        [](int class_id, double azimuth_deg, uint64_t seed, int size, int texture_id, int looks,
           double reflectivity, double depression_deg) {
            ChipSpec spec;
            spec.width = spec.height = size;
            spec.class_id = class_id;
            spec.azimuth_deg = azimuth_deg;
            spec.seed = seed;
            spec.clutter_texture_id = texture_id;
            spec.speckle_looks = looks;
            spec.target_reflectivity = reflectivity;
            spec.depression_deg = depression_deg;
            return render_chip(spec);
        },
        py::arg("class_id") = 0, py::arg("azimuth_deg") = 0.0, py::arg("seed") = 0,
        py::arg("size") = 64, py::arg("texture_id") = 0, py::arg("looks") = 4,
        py::arg("reflectivity") = 0.85, py::arg("depression_deg") = 15.0);

    m.def(
        "make_dataset",
        [](int scenario, int per_class, uint64_t seed, int size, int classes) {
            ScenarioSpec spec = ScenarioSpec::preset(scenario);
            spec.chip_width = spec.chip_height = size;
            spec.n_classes = classes;
            spec.validate();
            return make_dataset(spec, per_class, seed);
        },
        py::arg("scenario") = 2, py::arg("per_class") = 10, py::arg("seed") = 0,
        py::arg("size") = 64, py::arg("classes") = kNumClasses);

    m.def(
        "make_test_set",
        [](int scenario, int per_class, uint64_t seed, int size, int classes) {
            ScenarioSpec spec = ScenarioSpec::preset(scenario);
            spec.chip_width = spec.chip_height = size;
            spec.n_classes = classes;
            spec.validate();
            return make_test_set(spec, per_class, seed);
        },
        py::arg("scenario") = 2, py::arg("per_class") = 10, py::arg("seed") = 0,
        py::arg("size") = 64, py::arg("classes") = kNumClasses);

    m.def(
        "image_scr",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& amplitude,
           const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& m_t,
           const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& m_c) {
            const ScrReport r = image_scr(np_to_image(amplitude), np_to_mask(m_t),
                                          np_to_mask(m_c));
            py::dict d;
            d["value_db"] = r.value_db;
            d["target_peak"] = r.target_peak;
            d["clutter_mean"] = r.clutter_mean;
            d["n_clutter"] = r.n_clutter;
            return d;
        },
        py::arg("amplitude"), py::arg("target_mask"), py::arg("clutter_mask"));

    m.def("shift_scr", &shift_scr, py::arg("chip"), py::arg("delta_db"));

    m.def(
        "segment",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& amplitude,
           const std::string& preset) {
            const SegParams params = preset == "measured" ? SegParams::measured_like()
                                                          : SegParams::synthetic();
            const SegResult r = segment(np_to_image(amplitude), params);
            return py::make_tuple(mask_to_np(r.m_t), mask_to_np(r.m_s), r.degenerate);
        },
        py::arg("amplitude"), py::arg("preset") = "synthetic");

    m.def(
        "augment_chip",
        [](const SarChip& chip, uint64_t seed, double sigma_g, double n_m_lo, double n_m_hi,
           double n_sigma_lo, double n_sigma_hi) {
            AugParams p;
            p.sigma_g = sigma_g;
            p.n_m_lo = n_m_lo;
            p.n_m_hi = n_m_hi;
            p.n_sigma_lo = n_sigma_lo;
            p.n_sigma_hi = n_sigma_hi;
            p.validate();
            return augment_chip(chip, p, seed);
        },
        py::arg("chip"), py::arg("seed") = 0, py::arg("sigma_g") = 0.05,
        py::arg("n_m_lo") = 1.0, py::arg("n_m_hi") = 1.4, py::arg("n_sigma_lo") = 0.7,
        py::arg("n_sigma_hi") = 1.3);

    m.def(
        "build_source_domains",
        [](const Corpus& syn, int factor, double sigma_g, uint64_t seed) {
            AugParams p;
            p.augment_factor = factor;
            p.sigma_g = sigma_g;
            p.seed = seed;
            p.validate();
            return build_source_domains(syn, p);
        },
        py::arg("syn"), py::arg("factor") = 10, py::arg("sigma_g") = 0.05, py::arg("seed") = 0);

    m.def("save_corpus", &save_corpus, py::arg("dir"), py::arg("corpus"));
    m.def("load_corpus", &load_corpus, py::arg("dir"));

    py::class_<PyModel>(m, "Model")
        .def_property_readonly("step", [](const PyModel& p) { return p.step; })
        .def_property_readonly("log",
                               [](const PyModel& p) {
                                   py::list out;
                                   for (const EpochLog& e : p.log) out.append(epoch_log_to_dict(e));
                                   return out;
                               })
        .def(
            "infer",
            [](PyModel& p,
               const py::array_t<float, py::array::c_style | py::array::forcecast>& amplitude) {
                const Prediction pred = infer(*p.model, np_to_image(amplitude));
                return py::make_tuple(pred.label, pred.probs);
            },
            py::arg("amplitude"))
        .def(
            "accuracy",
            [](PyModel& p, const Corpus& test, int batch) {
                return evaluate_accuracy(*p.model, test, batch);
            },
            py::arg("test"), py::arg("batch") = 64)
        .def(
            "feature_scr",
            [](PyModel& p, const Corpus& corpus, int stage, int batch) {
                const FeatureScrStat s = corpus_feature_scr(*p.model, corpus, stage, batch);
                py::dict d;
                d["mean_db"] = s.mean;
                d["n_inf"] = s.n_inf;
                d["n"] = s.n;
                return d;
            },
            py::arg("corpus"), py::arg("stage") = 2, py::arg("batch") = 64)
        .def(
            "attribute",
            [](PyModel& p, const SarChip& chip, int grid, int budget, double fill, uint64_t seed,
               bool emit_map) {
                AttributionParams ap;
                ap.grid = grid;
                ap.budget = budget;
                ap.fill = fill;
                ap.seed = seed;
                ap.emit_map = emit_map;
                const AttributionReport r = attribute(*p.model, chip, ap);
                py::dict d;
                d["target_share"] = r.target_share;
                d["shadow_share"] = r.shadow_share;
                d["clutter_share"] = r.clutter_share;
                d["method"] = r.method;
                d["samples"] = r.samples;
                d["degenerate"] = r.degenerate;
                d["fill"] = r.fill;
                if (emit_map) d["db_map"] = image_to_np(r.db_map);
                return d;
            },
            py::arg("chip"), py::arg("grid") = 8, py::arg("budget") = 256,
            py::arg("fill") = 0.0, py::arg("seed") = 0, py::arg("emit_map") = false)
        .def(
            "save",
            [](PyModel& p, const std::filesystem::path& path) {
                nn::save_checkpoint(path, *p.model, p.step);
            },
            py::arg("path"));

    m.def(
        "train",
        [](const Corpus& d_syn, const Corpus& d_aug, int epochs, double lr, int batch,
           double lambda_adv, double lambda_mask, bool grl_ramp, uint64_t seed, int size, int c1,
           int c2, int classes, bool f_t, bool f_s, bool l_t, bool l_s, bool adv,
           const std::string& log_path) {
            const TrainConfig cfg =
                build_train_config(epochs, lr, batch, lambda_adv, lambda_mask, grl_ramp, seed,
                                   size, c1, c2, classes, f_t, f_s, l_t, l_s, adv, log_path);
            TrainedModel tm = train(d_syn, d_aug, cfg);
            auto out = std::make_unique<PyModel>();
            out->model = std::move(tm.model);
            out->step = tm.log.steps;
            out->log = tm.log.epochs;
            return out;
        },
        py::arg("d_syn"), py::arg("d_aug") = Corpus{}, py::arg("epochs") = 100,
        py::arg("lr") = 0.001, py::arg("batch") = 64, py::arg("lambda_adv") = 1.0,
        py::arg("lambda_mask") = 1.0, py::arg("grl_ramp") = true, py::arg("seed") = 0,
        py::arg("size") = 64, py::arg("c1") = 16, py::arg("c2") = 32,
        py::arg("classes") = kNumClasses, py::arg("f_t") = true, py::arg("f_s") = true,
        py::arg("l_t") = true, py::arg("l_s") = true, py::arg("adv") = true,
        py::arg("log_path") = std::string());

    m.def(
        "load_checkpoint",
        [](const std::filesystem::path& path) {
            nn::LoadedModel lm = nn::load_checkpoint(path);
            auto out = std::make_unique<PyModel>();
            out->model = std::move(lm.model);
            out->step = lm.step;
            return out;
        },
        py::arg("path"));

    m.def("corpus_clutter_mean", &corpus_clutter_mean, py::arg("corpus"));
    m.def("grl_schedule", &grl_schedule, py::arg("p"), py::arg("ramp") = true);
    m.def(
        "build_scr_sweep",
        [](const Corpus& chips, double range_db, double step_db) {
            ScrSweep sweep = build_scr_sweep(chips, range_db, step_db);
            return py::make_tuple(sweep.deltas_db, sweep.sets);
        },
        py::arg("chips"), py::arg("range_db") = 3.0, py::arg("step_db") = 0.5);
}
