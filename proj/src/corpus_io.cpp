#include "sarlab/corpus_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "sarlab/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "corpus files are little-endian; big-endian hosts are unsupported");

namespace sarlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_bytes(const fs::path& path, const void* data, size_t n) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!f) throw IoError("write failed: " + path.string());
}

void read_bytes(const fs::path& path, void* data, size_t n) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    f.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(f.gcount()) != n)
        throw IoError("truncated file: " + path.string());
    char extra;
    if (f.read(&extra, 1))
        throw IoError("file larger than expected: " + path.string());
}

json load_json_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw IoError("bad JSON in " + path.string() + ": " + e.what());
    }
}

}  // namespace

void save_chip(const fs::path& dir, const std::string& stem, const SarChip& chip) {
    write_bytes(dir / (stem + ".amp"), chip.amplitude.data(),
                chip.amplitude.size() * sizeof(float));
    write_bytes(dir / (stem + ".mt"), chip.target_mask.data(), chip.target_mask.size());
    write_bytes(dir / (stem + ".ms"), chip.shadow_mask.data(), chip.shadow_mask.size());

    json side = {
        {"label", chip.label},
        {"domain", to_string(chip.domain)},
        {"clipped", chip.clipped},
        {"composited", chip.composited},
        {"aug_fallback", chip.aug_fallback},
        {"spec",
         {{"width", chip.spec.width},
          {"height", chip.spec.height},
          {"class_id", chip.spec.class_id},
          {"azimuth_deg", chip.spec.azimuth_deg},
          {"depression_deg", chip.spec.depression_deg},
          {"target_reflectivity", chip.spec.target_reflectivity},
          {"clutter_texture_id", chip.spec.clutter_texture_id},
          {"speckle_looks", chip.spec.speckle_looks},
          {"seed", chip.spec.seed}}},
    };
    std::ofstream f(dir / (stem + ".json"));
    if (!f) throw IoError("cannot open for writing: " + (dir / (stem + ".json")).string());
    f << side.dump(2) << "\n";
}

SarChip load_chip(const fs::path& dir, const std::string& stem) {
    const json side = load_json_file(dir / (stem + ".json"));
    SarChip chip;
    try {
        chip.label = side.at("label").get<int>();
        chip.domain = domain_from_string(side.at("domain").get<std::string>());
        chip.clipped = side.value("clipped", false);
        chip.composited = side.value("composited", false);
        chip.aug_fallback = side.value("aug_fallback", false);
        const json& sp = side.at("spec");
        chip.spec.width = sp.at("width").get<int>();
        chip.spec.height = sp.at("height").get<int>();
        chip.spec.class_id = sp.at("class_id").get<int>();
        chip.spec.azimuth_deg = sp.at("azimuth_deg").get<double>();
        chip.spec.depression_deg = sp.at("depression_deg").get<double>();
        chip.spec.target_reflectivity = sp.at("target_reflectivity").get<double>();
        chip.spec.clutter_texture_id = sp.at("clutter_texture_id").get<int>();
        chip.spec.speckle_looks = sp.at("speckle_looks").get<int>();
        chip.spec.seed = sp.at("seed").get<uint64_t>();
    } catch (const json::exception& e) {
        throw IoError("bad sidecar " + (dir / (stem + ".json")).string() + ": " + e.what());
    }
    const int w = chip.spec.width, h = chip.spec.height;
    if (w <= 0 || h <= 0) throw IoError("bad sidecar dimensions in " + stem);

    chip.amplitude = Image(w, h);
    chip.target_mask = Mask(w, h);
    chip.shadow_mask = Mask(w, h);
    read_bytes(dir / (stem + ".amp"), chip.amplitude.data(),
               chip.amplitude.size() * sizeof(float));
    read_bytes(dir / (stem + ".mt"), chip.target_mask.data(), chip.target_mask.size());
    read_bytes(dir / (stem + ".ms"), chip.shadow_mask.data(), chip.shadow_mask.size());
    return chip;
}

void save_corpus(const fs::path& dir, const Corpus& corpus) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir.string());

    json manifest;
    manifest["chips"] = json::array();
    char stem[32];
    for (size_t i = 0; i < corpus.size(); ++i) {
        std::snprintf(stem, sizeof(stem), "chip_%06zu", i);
        save_chip(dir, stem, corpus[i]);
        manifest["chips"].push_back(stem);
    }
    std::ofstream f(dir / "manifest.json");
    if (!f) throw IoError("cannot open for writing: " + (dir / "manifest.json").string());
    f << manifest.dump(2) << "\n";
}

Corpus load_corpus(const fs::path& dir) {
    const json manifest = load_json_file(dir / "manifest.json");
    if (!manifest.contains("chips") || !manifest["chips"].is_array())
        throw IoError("manifest missing chip list: " + (dir / "manifest.json").string());
    Corpus corpus;
    corpus.reserve(manifest["chips"].size());
    for (const auto& stem : manifest["chips"])
        corpus.push_back(load_chip(dir, stem.get<std::string>()));
    return corpus;
}

}  // namespace sarlab
