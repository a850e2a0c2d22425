#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sarlab/corpus_io.hpp"
#include "sarlab/scenario.hpp"
#include "sarlab/scene.hpp"

using namespace sarlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / fs::path("sarlab_io_test")) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Corpus small_corpus() {
    ScenarioSpec sc = ScenarioSpec::preset(2);
    return make_dataset(sc, 1, 99);
}

}  // namespace

TEST_CASE("corpus round-trips bit-exactly") {
    TempDir tmp;
    Corpus corpus = small_corpus();
    corpus[0].clipped = true;
    corpus[1].composited = true;
    corpus[2].aug_fallback = true;
    save_corpus(tmp.path, corpus);
    Corpus back = load_corpus(tmp.path);
    REQUIRE(back.size() == corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        CHECK(back[i].amplitude == corpus[i].amplitude);
        CHECK(back[i].target_mask == corpus[i].target_mask);
        CHECK(back[i].shadow_mask == corpus[i].shadow_mask);
        CHECK(back[i].label == corpus[i].label);
        CHECK(back[i].domain == corpus[i].domain);
        CHECK(back[i].clipped == corpus[i].clipped);
        CHECK(back[i].composited == corpus[i].composited);
        CHECK(back[i].aug_fallback == corpus[i].aug_fallback);
        CHECK(back[i].spec.seed == corpus[i].spec.seed);
        CHECK(back[i].spec.class_id == corpus[i].spec.class_id);
        CHECK(back[i].spec.azimuth_deg == doctest::Approx(corpus[i].spec.azimuth_deg));
    }
}

TEST_CASE("saving overwrites deterministically") {
    TempDir tmp;
    Corpus corpus = small_corpus();
    save_corpus(tmp.path, corpus);
    save_corpus(tmp.path, corpus);  // second write over the same target
    Corpus back = load_corpus(tmp.path);
    CHECK(back.size() == corpus.size());
    CHECK(back[0].amplitude == corpus[0].amplitude);
}

TEST_CASE("loading does not mutate the on-disk corpus") {
    TempDir tmp;
    save_corpus(tmp.path, small_corpus());
    auto snapshot = [&] {
        std::vector<std::pair<fs::path, uintmax_t>> files;
        for (const auto& e : fs::recursive_directory_iterator(tmp.path))
            if (e.is_regular_file()) files.emplace_back(e.path(), e.file_size());
        std::sort(files.begin(), files.end());
        return files;
    };
    auto before = snapshot();
    Corpus loaded = load_corpus(tmp.path);
    loaded[0].amplitude.at(0, 0) = 0.5f;  // mutating the copy must not touch disk
    CHECK(snapshot() == before);
}

TEST_CASE("truncated amplitude file raises IoError") {
    TempDir tmp;
    Corpus corpus = small_corpus();
    save_corpus(tmp.path, corpus);
    fs::path amp = tmp.path / "chip_000000.amp";
    REQUIRE(fs::exists(amp));
    fs::resize_file(amp, fs::file_size(amp) / 2);
    CHECK_THROWS_AS(load_corpus(tmp.path), IoError);
}

TEST_CASE("missing manifest raises IoError") {
    TempDir tmp;
    CHECK_THROWS_AS(load_corpus(tmp.path / "does_not_exist"), IoError);
}

TEST_CASE("corrupt sidecar json raises IoError") {
    TempDir tmp;
    save_corpus(tmp.path, small_corpus());
    std::ofstream(tmp.path / "chip_000000.json") << "{not json";
    CHECK_THROWS_AS(load_corpus(tmp.path), IoError);
}

TEST_CASE("single chip save/load round-trip") {
    TempDir tmp;
    SarChip chip = small_corpus()[3];
    save_chip(tmp.path, "solo", chip);
    SarChip back = load_chip(tmp.path, "solo");
    CHECK(back.amplitude == chip.amplitude);
    CHECK(back.target_mask == chip.target_mask);
    CHECK(back.shadow_mask == chip.shadow_mask);
    CHECK(back.label == chip.label);
}
