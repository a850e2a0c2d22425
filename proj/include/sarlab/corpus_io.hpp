#pragma once

#include <filesystem>
#include <string>

#include "sarlab/scene.hpp"

namespace sarlab {

// On-disk corpus layout (one directory per split):
//   manifest.json              {"chips": ["chip_000000", ...]}
//   chip_000000.amp            float32 little-endian, row-major amplitudes
//   chip_000000.mt             uint8 {0,1} target mask, row-major
//   chip_000000.ms             uint8 {0,1} shadow mask, row-major
//   chip_000000.json           {"label", "domain", "spec", flags}
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& dir);

// Single-chip pieces, exposed for targeted tests and partial loads.
void save_chip(const std::filesystem::path& dir, const std::string& stem, const SarChip& chip);
SarChip load_chip(const std::filesystem::path& dir, const std::string& stem);

}  // namespace sarlab
