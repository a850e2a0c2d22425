// sarlab: data generation, augmentation, training, and evaluation pipeline.
//
// Every subcommand reads an optional JSON config (--config or $SARLAB_CONFIG,
// flags win over file values), writes its artifact deterministically for a
// fixed seed, and exits 0 on success, 1 on runtime failure, 2 on usage errors.
// Failures emit exactly one JSON line on stderr.

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sarlab/augment.hpp"
#include "sarlab/corpus_io.hpp"
#include "sarlab/evalkit.hpp"
#include "sarlab/nn/checkpoint.hpp"
#include "sarlab/scenario.hpp"
#include "sarlab/scr.hpp"
#include "sarlab/segmentation.hpp"
#include "sarlab/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sarlab;

namespace {

constexpr const char* kConfigEnvVar = "SARLAB_CONFIG";

// JSON-safe number: infinities and NaN become strings.
json jnum(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string timestamp_utc() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_report(const fs::path& path, json report) {
    report["generated_at"] = timestamp_utc();
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << report.dump(2) << "\n";
}

// Fill defaults of not-yet-parsed options from the config file section.
void apply_config_section(CLI::App* cmd, const json& section) {
    for (auto it = section.begin(); it != section.end(); ++it) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + it.key());
        if (!opt) throw ConfigurationError("config key not recognized: " + it.key());
        const json& v = it.value();
        opt->default_val(v.is_string() ? v.get<std::string>() : v.dump());
    }
}

json load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigurationError("bad config JSON: " + std::string(e.what()));
    }
}

ScenarioSpec scenario_with(int id, int per_chip_size, int n_classes) {
    ScenarioSpec s = ScenarioSpec::preset(id);
    s.chip_width = per_chip_size;
    s.chip_height = per_chip_size;
    s.n_classes = n_classes;
    s.validate();
    return s;
}

json curve_to_json(const ScrCurve& curve) {
    json pts = json::array();
    for (const ScrCurvePoint& p : curve.points)
        pts.push_back({{"delta_db", p.delta_db},
                       {"accuracy", p.accuracy},
                       {"mean_feature_scr", jnum(p.mean_feature_scr)},
                       {"n_inf", p.n_inf}});
    return {{"stage", curve.stage},
            {"points", pts},
            {"dacc_0_minus3", jnum(curve.dacc_0_minus3)},
            {"dacc_0_plus3", jnum(curve.dacc_0_plus3)}};
}

std::string sweep_dir_name(double delta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sweep_%+05.1f", delta);
    return buf;
}

struct TrainFlags {
    std::string corpus, out, log;
    uint64_t seed = 0;
    int epochs = 100;
    double lr = 0.001;
    int batch = 64;
    double lambda_adv = 1.0, lambda_mask = 1.0;
    bool no_ramp = false;
    int c1 = 16, c2 = 32;
    int classes = kNumClasses;
    int size = 64;
    std::string arch = "irasnet";  // irasnet | cnn | cnn-grl | custom toggles
    bool f_t = true, f_s = true, l_t = true, l_s = true, adv = true;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--seed", f.seed, "root RNG seed");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--batch", f.batch, "batch size");
    cmd->add_option("--lambda-adv", f.lambda_adv, "adversarial loss weight (GRL strength)");
    cmd->add_option("--lambda-mask", f.lambda_mask, "positional loss weight");
    cmd->add_flag("--no-ramp", f.no_ramp, "disable the GRL warm-up schedule");
    cmd->add_option("--c1", f.c1, "stage-1 channels");
    cmd->add_option("--c2", f.c2, "stage-2 channels");
    cmd->add_option("--classes", f.classes, "number of target classes");
    cmd->add_option("--size", f.size, "chip side length");
    cmd->add_option("--arch", f.arch, "irasnet | cnn | cnn-grl | custom");
    cmd->add_flag("--f-t,!--no-f-t", f.f_t, "target branch gating (custom arch)");
    cmd->add_flag("--f-s,!--no-f-s", f.f_s, "shadow branch gating (custom arch)");
    cmd->add_flag("--l-t,!--no-l-t", f.l_t, "target positional loss (custom arch)");
    cmd->add_flag("--l-s,!--no-l-s", f.l_s, "shadow positional loss (custom arch)");
    cmd->add_flag("--adv,!--no-adv", f.adv, "adversarial head (custom arch)");
}

TrainConfig make_train_config(const TrainFlags& f) {
    TrainConfig cfg;
    cfg.epochs = f.epochs;
    cfg.lr = f.lr;
    cfg.batch_size = f.batch;
    cfg.lambda_adv = f.lambda_adv;
    cfg.lambda_mask = f.lambda_mask;
    cfg.grl_ramp = !f.no_ramp;
    cfg.seed = f.seed;
    cfg.log_path = f.log;
    cfg.model.c1 = f.c1;
    cfg.model.c2 = f.c2;
    cfg.model.num_classes = f.classes;
    cfg.model.in_height = f.size;
    cfg.model.in_width = f.size;
    if (f.arch == "irasnet") {
        cfg.model.use_f_t = cfg.model.use_f_s = cfg.model.use_l_t = cfg.model.use_l_s = true;
        cfg.model.use_adv = true;
    } else if (f.arch == "cnn") {
        cfg.model.use_f_t = cfg.model.use_f_s = cfg.model.use_l_t = cfg.model.use_l_s = false;
        cfg.model.use_adv = false;
    } else if (f.arch == "cnn-grl") {
        cfg.model.use_f_t = cfg.model.use_f_s = cfg.model.use_l_t = cfg.model.use_l_s = false;
        cfg.model.use_adv = true;
    } else if (f.arch == "custom") {
        cfg.model.use_f_t = f.f_t;
        cfg.model.use_f_s = f.f_s;
        cfg.model.use_l_t = f.l_t;
        cfg.model.use_l_s = f.l_s;
        cfg.model.use_adv = f.adv;
    } else {
        throw ArgumentError("unknown --arch: " + f.arch);
    }
    cfg.validate();
    return cfg;
}

// Loads train_syn (+ train_aug when present) from a scenario directory.
std::pair<Corpus, Corpus> load_train_corpora(const fs::path& dir) {
    if (fs::exists(dir / "train_syn")) {
        Corpus syn = load_corpus(dir / "train_syn");
        Corpus aug;
        if (fs::exists(dir / "train_aug")) aug = load_corpus(dir / "train_aug");
        return {std::move(syn), std::move(aug)};
    }
    // Plain corpus directory: split by domain tag.
    Corpus all = load_corpus(dir);
    Corpus syn, aug;
    for (SarChip& c : all)
        (c.domain == Domain::Aug ? aug : syn).push_back(std::move(c));
    return {std::move(syn), std::move(aug)};
}

int run(int argc, char** argv) {
    CLI::App app{"SAR chip laboratory: clutter-reduction and domain-invariant training"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (or $SARLAB_CONFIG)");

    // ---- gen-data ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "render a synthetic corpus");
    struct {
        std::string out;
        int scenario = 2, classes = kNumClasses, per_class = 10, size = 64;
        uint64_t seed = 0;
        std::string role = "train";
    } g;
    gen->add_option("--out", g.out, "output corpus directory")->required();
    gen->add_option("--scenario", g.scenario, "scenario id 1-4");
    gen->add_option("--classes", g.classes, "number of target classes");
    gen->add_option("--per-class", g.per_class, "chips per class");
    gen->add_option("--size", g.size, "chip side length");
    gen->add_option("--seed", g.seed, "root RNG seed");
    gen->add_option("--role", g.role, "train | test");

    // ---- segment -----------------------------------------------------------
    auto* seg = app.add_subcommand("segment", "threshold-based mask reconstruction");
    struct {
        std::string in, out, report;
        std::string preset = "synthetic";
        double min_target = -1, std_thresh = -1, shadow_thresh = -1;
    } sg;
    seg->add_option("--in", sg.in, "input corpus directory")->required();
    seg->add_option("--out", sg.out, "output corpus with reconstructed masks")->required();
    seg->add_option("--report", sg.report, "optional JSON report path");
    seg->add_option("--preset", sg.preset, "synthetic | measured");
    seg->add_option("--min-target", sg.min_target, "minimum target intensity override");
    seg->add_option("--std-threshold", sg.std_thresh, "std percentage override");
    seg->add_option("--shadow-threshold", sg.shadow_thresh, "shadow fraction override");

    // ---- augment -----------------------------------------------------------
    auto* aug = app.add_subcommand("augment", "clutter-statistics augmentation");
    struct {
        std::string in, out;
        int factor = 10;
        double sigma_g = 0.05;
        uint64_t seed = 0;
    } au;
    aug->add_option("--in", au.in, "synthetic corpus directory")->required();
    aug->add_option("--out", au.out, "augmented corpus directory")->required();
    aug->add_option("--factor", au.factor, "copies per chip");
    aug->add_option("--sigma-g", au.sigma_g, "Gaussian noise std");
    aug->add_option("--seed", au.seed, "root RNG seed");

    // ---- build-scenarios ---------------------------------------------------
    auto* bs = app.add_subcommand("build-scenarios", "train/test corpora for one scenario");
    struct {
        std::string out;
        int scenario = 2, classes = kNumClasses, per_class = 10, size = 64, factor = 10;
        int test_per_class = -1;
        double sigma_g = 0.05;
        uint64_t seed = 0;
    } b;
    bs->add_option("--out", b.out, "output directory")->required();
    bs->add_option("--scenario", b.scenario, "scenario id 1-4");
    bs->add_option("--classes", b.classes, "number of target classes");
    bs->add_option("--per-class", b.per_class, "train chips per class");
    bs->add_option("--test-per-class", b.test_per_class, "test chips per class (default same)");
    bs->add_option("--size", b.size, "chip side length");
    bs->add_option("--factor", b.factor, "augmentation factor");
    bs->add_option("--sigma-g", b.sigma_g, "augmentation noise std");
    bs->add_option("--seed", b.seed, "root RNG seed");

    // ---- train -------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train a model on a scenario directory");
    TrainFlags tf;
    tr->add_option("--corpus", tf.corpus, "scenario directory or corpus")->required();
    tr->add_option("--out", tf.out, "checkpoint path")->required();
    tr->add_option("--log", tf.log, "JSONL training log path");
    add_train_flags(tr, tf);

    // ---- eval --------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "accuracy of a checkpoint on a test corpus");
    struct {
        std::string checkpoint, test, out;
        int scenario = 2, batch = 64;
        uint64_t seed = 0;
    } e;
    ev->add_option("--checkpoint", e.checkpoint, "checkpoint path")->required();
    ev->add_option("--test", e.test, "test corpus directory")->required();
    ev->add_option("--out", e.out, "JSON report path")->required();
    ev->add_option("--scenario", e.scenario, "scenario id recorded in the report");
    ev->add_option("--batch", e.batch, "eval batch size");
    ev->add_option("--seed", e.seed, "seed recorded in the report");

    // ---- scr-sweep ---------------------------------------------------------
    auto* sw = app.add_subcommand("scr-sweep", "build the SCR fluctuation test sets");
    struct {
        std::string in, out;
        double range = 3.0, step = 0.5;
    } s;
    sw->add_option("--in", s.in, "base test corpus")->required();
    sw->add_option("--out", s.out, "output directory for the sweep sets")->required();
    sw->add_option("--range", s.range, "sweep half-range in dB");
    sw->add_option("--step", s.step, "sweep step in dB");

    // ---- scr-sweep-eval ----------------------------------------------------
    auto* se = app.add_subcommand("scr-sweep-eval", "accuracy/feature-SCR curve over a sweep");
    struct {
        std::string checkpoint, sweep, out;
        int stage = 2, batch = 64;
    } sv;
    se->add_option("--checkpoint", sv.checkpoint, "checkpoint path")->required();
    se->add_option("--sweep", sv.sweep, "sweep directory from scr-sweep")->required();
    se->add_option("--out", sv.out, "JSON report path")->required();
    se->add_option("--stage", sv.stage, "feature stage (1 or 2)");
    se->add_option("--batch", sv.batch, "eval batch size");

    // ---- attribute ---------------------------------------------------------
    auto* at = app.add_subcommand("attribute", "region attribution shares via sampling");
    struct {
        std::string checkpoint, test, out, maps;
        int budget = 256, grid = 8, chips = 50;
        uint64_t seed = 0;
    } a;
    at->add_option("--checkpoint", a.checkpoint, "checkpoint path")->required();
    at->add_option("--test", a.test, "test corpus directory")->required();
    at->add_option("--out", a.out, "JSON report path")->required();
    at->add_option("--maps", a.maps, "optional directory for per-chip dB maps");
    at->add_option("--budget", a.budget, "masked model evaluations per chip");
    at->add_option("--grid", a.grid, "superpixels per side");
    at->add_option("--chips", a.chips, "number of test chips to attribute");
    at->add_option("--seed", a.seed, "root RNG seed");

    // ---- ablate ------------------------------------------------------------
    auto* ab = app.add_subcommand("ablate", "train and score the standard toggle grid");
    TrainFlags af;
    std::string ab_test, ab_out, ab_seeds = "1,2,3";
    ab->add_option("--corpus", af.corpus, "scenario directory or corpus")->required();
    ab->add_option("--test", ab_test, "test corpus directory")->required();
    ab->add_option("--out", ab_out, "JSON report path")->required();
    ab->add_option("--seeds", ab_seeds, "comma-separated training seeds");
    add_train_flags(ab, af);

    // Config file: fill defaults before parsing so flags win. The option is
    // registered on every subcommand so it may appear before or after the
    // subcommand name; the value is read in a pre-scan.
    const std::function<bool(CLI::App*)> all_cmds = [](CLI::App*) { return true; };
    for (auto* cmd : app.get_subcommands(all_cmds))
        cmd->add_option("--config", config_path, "JSON config file (or $SARLAB_CONFIG)");
    std::string pre_config;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") pre_config = argv[i + 1];
    if (pre_config.empty())
        if (const char* envp = std::getenv(kConfigEnvVar)) pre_config = envp;
    if (!pre_config.empty()) {
        const json cfg = load_config_file(pre_config);
        for (auto* cmd : app.get_subcommands(all_cmds))
            if (cfg.contains(cmd->get_name())) apply_config_section(cmd, cfg[cmd->get_name()]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& pe) {
        std::cerr << json{{"error", pe.what()}, {"type", "usage"}}.dump() << "\n";
        return 2;
    }

    if (gen->parsed()) {
        const ScenarioSpec spec = scenario_with(g.scenario, g.size, g.classes);
        Corpus corpus = g.role == "test" ? make_test_set(spec, g.per_class, g.seed)
                        : g.role == "train"
                            ? make_dataset(spec, g.per_class, g.seed)
                            : throw ArgumentError("unknown --role: " + g.role);
        save_corpus(g.out, corpus);
        return 0;
    }

    if (seg->parsed()) {
        SegParams params = sg.preset == "measured"     ? SegParams::measured_like()
                           : sg.preset == "synthetic" ? SegParams::synthetic()
                                                      : throw ArgumentError("unknown --preset: " +
                                                                            sg.preset);
        if (sg.min_target > 0) params.min_target_intensity = sg.min_target;
        if (sg.std_thresh > 0) params.std_threshold = sg.std_thresh;
        if (sg.shadow_thresh > 0) params.shadow_threshold = sg.shadow_thresh;
        Corpus corpus = load_corpus(sg.in);
        double iou_t = 0, iou_s = 0;
        int degenerate = 0;
        for (SarChip& chip : corpus) {
            const SegResult r = segment(chip.amplitude, params);
            iou_t += mask_iou(r.m_t, chip.target_mask);
            iou_s += mask_iou(r.m_s, chip.shadow_mask);
            degenerate += r.degenerate;
            chip.target_mask = r.m_t;
            chip.shadow_mask = r.m_s;
        }
        save_corpus(sg.out, corpus);
        if (!sg.report.empty())
            write_report(sg.report,
                         {{"n_chips", corpus.size()},
                          {"mean_target_iou", jnum(iou_t / corpus.size())},
                          {"mean_shadow_iou", jnum(iou_s / corpus.size())},
                          {"degenerate", degenerate}});
        return 0;
    }

    if (aug->parsed()) {
        AugParams params;
        params.augment_factor = au.factor;
        params.sigma_g = au.sigma_g;
        params.seed = au.seed;
        const Corpus syn = load_corpus(au.in);
        auto [d_syn, d_aug] = build_source_domains(syn, params);
        save_corpus(au.out, d_aug);
        return 0;
    }

    if (bs->parsed()) {
        const ScenarioSpec spec = scenario_with(b.scenario, b.size, b.classes);
        const int test_n = b.test_per_class > 0 ? b.test_per_class : b.per_class;
        const Corpus syn = make_dataset(spec, b.per_class, b.seed);
        save_corpus(fs::path(b.out) / "train_syn", syn);
        if (spec.train_include_aug) {
            AugParams params;
            params.augment_factor = b.factor;
            params.sigma_g = b.sigma_g;
            params.seed = derive_seed(b.seed, 0x6175);
            auto [d_syn, d_aug] = build_source_domains(syn, params);
            save_corpus(fs::path(b.out) / "train_aug", d_aug);
        }
        const Corpus test = make_test_set(spec, test_n, derive_seed(b.seed, 0x7473));
        save_corpus(fs::path(b.out) / "test", test);
        json scen = {{"scenario", spec.id},
                     {"classes", spec.n_classes},
                     {"per_class", b.per_class},
                     {"test_per_class", test_n},
                     {"size", b.size},
                     {"seed", b.seed}};
        if (spec.id == 3) {
            const ScrSweep sweep = make_sweep_sets(test, spec);
            json dirs = json::array();
            for (size_t k = 0; k < sweep.sets.size(); ++k) {
                const std::string name = sweep_dir_name(sweep.deltas_db[k]);
                save_corpus(fs::path(b.out) / name, sweep.sets[k]);
                dirs.push_back({{"delta_db", sweep.deltas_db[k]}, {"dir", name}});
            }
            scen["sweep"] = dirs;
        }
        std::ofstream f(fs::path(b.out) / "scenario.json");
        if (!f) throw IoError("cannot write scenario.json");
        f << scen.dump(2) << "\n";
        return 0;
    }

    if (tr->parsed()) {
        auto [d_syn, d_aug] = load_train_corpora(tf.corpus);
        const TrainConfig cfg = make_train_config(tf);
        TrainedModel tm = train(d_syn, d_aug, cfg);
        nn::save_checkpoint(tf.out, *tm.model, tm.log.steps);
        return 0;
    }

    if (ev->parsed()) {
        nn::LoadedModel lm = nn::load_checkpoint(e.checkpoint);
        const Corpus test = load_corpus(e.test);
        const double acc = evaluate_accuracy(*lm.model, test, e.batch);
        write_report(e.out, {{"scenario", e.scenario},
                             {"accuracy", acc},
                             {"seed", e.seed},
                             {"n_test", test.size()},
                             {"checkpoint_step", lm.step}});
        return 0;
    }

    if (sw->parsed()) {
        const Corpus base = load_corpus(s.in);
        const ScrSweep sweep = build_scr_sweep(base, s.range, s.step);
        json dirs = json::array();
        for (size_t k = 0; k < sweep.sets.size(); ++k) {
            const std::string name = sweep_dir_name(sweep.deltas_db[k]);
            save_corpus(fs::path(s.out) / name, sweep.sets[k]);
            dirs.push_back({{"delta_db", sweep.deltas_db[k]}, {"dir", name}});
        }
        std::ofstream f(fs::path(s.out) / "sweep.json");
        if (!f) throw IoError("cannot write sweep.json");
        f << json{{"range_db", s.range}, {"step_db", s.step}, {"sets", dirs}}.dump(2) << "\n";
        return 0;
    }

    if (se->parsed()) {
        nn::LoadedModel lm = nn::load_checkpoint(sv.checkpoint);
        std::ifstream mf(fs::path(sv.sweep) / "sweep.json");
        if (!mf) throw IoError("sweep directory missing sweep.json: " + sv.sweep);
        const json manifest = json::parse(mf);
        ScrSweep sweep;
        for (const json& entry : manifest.at("sets")) {
            sweep.deltas_db.push_back(entry.at("delta_db").get<double>());
            sweep.sets.push_back(load_corpus(fs::path(sv.sweep) / entry.at("dir").get<std::string>()));
        }
        const ScrCurve curve = scr_curve(*lm.model, sweep, sv.stage, sv.batch);
        write_report(sv.out, curve_to_json(curve));
        return 0;
    }

    if (at->parsed()) {
        nn::LoadedModel lm = nn::load_checkpoint(a.checkpoint);
        Corpus test = load_corpus(a.test);
        if (a.chips > 0 && static_cast<size_t>(a.chips) < test.size())
            test.resize(a.chips);
        AttributionParams params;
        params.budget = a.budget;
        params.grid = a.grid;
        params.seed = a.seed;
        params.fill = corpus_clutter_mean(test);
        const AttributionReport rep = attribute_corpus(*lm.model, test, params);
        if (!a.maps.empty()) {
            std::error_code ec;
            fs::create_directories(a.maps, ec);
            for (size_t i = 0; i < test.size(); ++i) {
                AttributionParams p = params;
                p.seed = derive_seed(params.seed, i);
                p.emit_map = true;
                const AttributionReport r = attribute(*lm.model, test[i], p);
                char stem[32];
                std::snprintf(stem, sizeof(stem), "map_%04zu", i);
                std::ofstream mf(fs::path(a.maps) / (std::string(stem) + ".f32"),
                                 std::ios::binary);
                mf.write(reinterpret_cast<const char*>(r.db_map.data()),
                         static_cast<std::streamsize>(r.db_map.size() * sizeof(float)));
                std::ofstream sf(fs::path(a.maps) / (std::string(stem) + ".json"));
                sf << json{{"width", r.db_map.width()},
                           {"height", r.db_map.height()},
                           {"floor_db", -40.0},
                           {"chip_index", i}}
                          .dump(2)
                   << "\n";
            }
        }
        write_report(a.out, {{"target_share", jnum(rep.target_share)},
                             {"shadow_share", jnum(rep.shadow_share)},
                             {"clutter_share", jnum(rep.clutter_share)},
                             {"method", rep.method},
                             {"samples", rep.samples},
                             {"fill", jnum(rep.fill)},
                             {"degenerate", rep.degenerate},
                             {"n_chips", test.size()},
                             {"seed", a.seed}});
        return 0;
    }

    if (ab->parsed()) {
        auto [d_syn, d_aug] = load_train_corpora(af.corpus);
        const Corpus test = load_corpus(ab_test);
        const TrainConfig base_cfg = make_train_config(af);
        std::vector<uint64_t> seeds;
        for (size_t pos = 0; pos < ab_seeds.size();) {
            const size_t comma = ab_seeds.find(',', pos);
            const std::string tok = ab_seeds.substr(pos, comma - pos);
            if (!tok.empty()) seeds.push_back(std::stoull(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        const AblationTable table =
            run_ablation(default_ablation_grid(), d_syn, d_aug, test, base_cfg, seeds);
        json rows = json::array();
        for (const AblationRow& row : table.rows) {
            json per_seed = json::array();
            for (double v : row.per_seed) per_seed.push_back(jnum(v));
            rows.push_back({{"label", row.config.label},
                            {"f_t", row.config.use_f_t},
                            {"f_s", row.config.use_f_s},
                            {"l_t", row.config.use_l_t},
                            {"l_s", row.config.use_l_s},
                            {"adv", row.config.use_adv},
                            {"per_seed", per_seed},
                            {"mean_accuracy", jnum(row.mean_accuracy)},
                            {"delta_vs_plain", jnum(row.delta_vs_plain)}});
        }
        write_report(ab_out, {{"rows", rows}, {"has_plain_row", table.has_plain_row}});
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ArgumentError& ex) {
        std::cerr << json{{"error", ex.what()}, {"type", "argument"}}.dump() << "\n";
        return 1;
    } catch (const ConfigurationError& ex) {
        std::cerr << json{{"error", ex.what()}, {"type", "configuration"}}.dump() << "\n";
        return 1;
    } catch (const ContractError& ex) {
        std::cerr << json{{"error", ex.what()}, {"type", "contract"}}.dump() << "\n";
        return 1;
    } catch (const IoError& ex) {
        std::cerr << json{{"error", ex.what()}, {"type", "io"}}.dump() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << json{{"error", ex.what()}, {"type", "internal"}}.dump() << "\n";
        return 1;
    }
}
