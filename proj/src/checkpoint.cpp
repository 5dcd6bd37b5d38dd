#include "mdsum/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace mdsum {

namespace {
constexpr int kCheckpointVersion = 1;
constexpr const char* kFormatTag = "mdsum-checkpoint";
}  // namespace

void save_checkpoint(const Model& m, const Vocabulary& vocab,
                     const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = kFormatTag;
    j["version"] = kCheckpointVersion;
    j["dims"] = {{"vocab", m.dims().vocab},
                 {"embed", m.dims().embed},
                 {"hidden", m.dims().hidden}};
    j["vocab"] = vocab.tokens();
    nlohmann::json params = nlohmann::json::array();
    for (const Parameter* p : m.parameters()) {
        nlohmann::json rec;
        rec["name"] = p->name;
        rec["rows"] = p->value.rows();
        rec["cols"] = p->value.cols();
        std::vector<double> flat(p->value.data(), p->value.data() + p->value.size());
        rec["values"] = flat;
        params.push_back(std::move(rec));
    }
    j["params"] = std::move(params);

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write checkpoint: " + path.string());
    out << j.dump();
    out << '\n';
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read checkpoint: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormatTag)
            throw ConfigError("not a checkpoint file: " + path.string());
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw ConfigError("unsupported checkpoint version " +
                              std::to_string(j.at("version").get<int>()) + " in " +
                              path.string());
        ModelDims dims;
        dims.vocab = j.at("dims").at("vocab").get<std::size_t>();
        dims.embed = j.at("dims").at("embed").get<std::size_t>();
        dims.hidden = j.at("dims").at("hidden").get<std::size_t>();

        const auto tokens = j.at("vocab").get<std::vector<std::string>>();
        if (tokens.size() != dims.vocab)
            throw ConfigError("checkpoint vocabulary size disagrees with dims in " +
                              path.string());
        Vocabulary vocab;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i < 4) {
                if (tokens[i] != vocab.decode(static_cast<int>(i)))
                    throw ConfigError("checkpoint special tokens are inconsistent in " +
                                      path.string());
            } else {
                vocab.add(tokens[i]);
            }
        }
        if (vocab.size() != dims.vocab)
            throw ConfigError("checkpoint vocabulary contains duplicates in " + path.string());

        LoadedCheckpoint loaded{Model(dims), std::move(vocab)};
        auto params = loaded.model.parameters();
        const auto& precs = j.at("params");
        if (precs.size() != params.size())
            throw ConfigError("checkpoint parameter count mismatch in " + path.string());
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& rec = precs[i];
            if (rec.at("name").get<std::string>() != params[i]->name)
                throw ConfigError("checkpoint parameter '" +
                                  rec.at("name").get<std::string>() +
                                  "' does not match expected '" + params[i]->name + "'");
            const auto rows = rec.at("rows").get<std::size_t>();
            const auto cols = rec.at("cols").get<std::size_t>();
            if (rows != params[i]->value.rows() || cols != params[i]->value.cols())
                throw ConfigError("checkpoint parameter '" + params[i]->name +
                                  "' has incompatible shape in " + path.string());
            const auto flat = rec.at("values").get<std::vector<double>>();
            if (flat.size() != rows * cols)
                throw ConfigError("checkpoint parameter '" + params[i]->name +
                                  "' has wrong value count in " + path.string());
            std::copy(flat.begin(), flat.end(), params[i]->value.data());
            if (!all_finite(params[i]->value))
                throw ConfigError("checkpoint parameter '" + params[i]->name +
                                  "' contains non-finite values in " + path.string());
        }
        return loaded;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace mdsum
