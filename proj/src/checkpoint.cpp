#include "sarlab/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace sarlab::nn {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoints are little-endian; big-endian hosts are unsupported");

namespace {

constexpr char kMagic[8] = {'S', 'A', 'R', 'L', 'A', 'B', 'C', 'K'};
constexpr int kFormatVersion = 1;

json config_to_json(const ModelConfig& c) {
    return {{"in_height", c.in_height},   {"in_width", c.in_width},
            {"c1", c.c1},                 {"c2", c.c2},
            {"num_classes", c.num_classes}, {"num_domains", c.num_domains},
            {"disc_hidden", c.disc_hidden}, {"use_f_t", c.use_f_t},
            {"use_f_s", c.use_f_s},       {"use_l_t", c.use_l_t},
            {"use_l_s", c.use_l_s},       {"use_adv", c.use_adv}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.in_height = j.at("in_height").get<int>();
    c.in_width = j.at("in_width").get<int>();
    c.c1 = j.at("c1").get<int>();
    c.c2 = j.at("c2").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
    c.num_domains = j.at("num_domains").get<int>();
    c.disc_hidden = j.at("disc_hidden").get<int>();
    c.use_f_t = j.at("use_f_t").get<bool>();
    c.use_f_s = j.at("use_f_s").get<bool>();
    c.use_l_t = j.at("use_l_t").get<bool>();
    c.use_l_s = j.at("use_l_s").get<bool>();
    c.use_adv = j.at("use_adv").get<bool>();
    return c;
}

}  // namespace

void save_checkpoint(const fs::path& path, Model<float>& model, int64_t step) {
    const ModelConfig& cfg = model.config();
    json header;
    header["format"] = kFormatVersion;
    header["config"] = config_to_json(cfg);
    header["n_stages"] = ModelConfig::kStages;
    json shapes = json::array();
    for (int s = 1; s <= ModelConfig::kStages; ++s) {
        auto [h, w] = model.stage_size(s);
        shapes.push_back({model.stage_channels(s), h, w});
    }
    header["stage_shapes"] = shapes;
    header["step"] = step;
    header["params"] = json::array();
    for (Param<float>* p : model.params().all()) {
        header["params"].push_back({{"name", p->name},
                                    {"group", to_string(p->group)},
                                    {"shape", {p->shape.b, p->shape.c, p->shape.h, p->shape.w}},
                                    {"count", p->value.size()},
                                    {"trainable", p->trainable}});
    }
    const std::string head = header.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(kMagic, sizeof(kMagic));
    const uint32_t hlen = static_cast<uint32_t>(head.size());
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (Param<float>* p : model.params().all())
        f.write(reinterpret_cast<const char*>(p->value.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(float)));
    if (!f) throw IoError("write failed: " + path.string());
}

LoadedModel load_checkpoint(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    char magic[8];
    f.read(magic, sizeof(magic));
    if (f.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a checkpoint file: " + path.string());
    uint32_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (f.gcount() != sizeof(hlen)) throw IoError("truncated checkpoint: " + path.string());
    std::string head(hlen, '\0');
    f.read(head.data(), hlen);
    if (static_cast<uint32_t>(f.gcount()) != hlen)
        throw IoError("truncated checkpoint: " + path.string());

    json header;
    try {
        header = json::parse(head);
    } catch (const json::parse_error& e) {
        throw IoError("corrupt checkpoint header: " + std::string(e.what()));
    }
    if (header.value("format", -1) != kFormatVersion)
        throw ConfigurationError("unsupported checkpoint format version");

    LoadedModel out;
    ModelConfig cfg;
    try {
        cfg = config_from_json(header.at("config"));
        out.step = header.at("step").get<int64_t>();
    } catch (const json::exception& e) {
        throw IoError("corrupt checkpoint header: " + std::string(e.what()));
    }
    // Init seed is irrelevant: every parameter is overwritten below.
    out.model = std::make_unique<Model<float>>(cfg, 0);

    for (const json& pj : header.at("params")) {
        const std::string name = pj.at("name").get<std::string>();
        const size_t count = pj.at("count").get<size_t>();
        Param<float>* p = out.model->params().find(name);
        if (!p)
            throw ConfigurationError("checkpoint parameter not in model: " + name);
        if (p->value.size() != count)
            throw ConfigurationError("checkpoint parameter size mismatch: " + name);
        f.read(reinterpret_cast<char*>(p->value.data()),
               static_cast<std::streamsize>(count * sizeof(float)));
        if (static_cast<size_t>(f.gcount()) != count * sizeof(float))
            throw IoError("truncated checkpoint: " + path.string());
    }
    char extra;
    if (f.read(&extra, 1)) throw IoError("checkpoint has trailing bytes: " + path.string());
    return out;
}

}  // namespace sarlab::nn
