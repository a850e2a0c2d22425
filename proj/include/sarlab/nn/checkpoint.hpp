#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "sarlab/nn/model.hpp"

namespace sarlab::nn {

struct LoadedModel {
    std::unique_ptr<Model<float>> model;
    int64_t step = 0;
};

// Single-file format: 8-byte magic, uint32 header length, JSON header
// (config, stage shapes, training step, parameter directory), then each
// parameter's raw float32 little-endian payload in directory order.
void save_checkpoint(const std::filesystem::path& path, Model<float>& model, int64_t step);
LoadedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sarlab::nn
