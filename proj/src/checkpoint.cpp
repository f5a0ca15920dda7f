#include "lvr/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "lvr/error.hpp"

namespace lvr {

namespace {

using nlohmann::json;

void write_doubles(std::ofstream& out, const double* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* p, std::size_t n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ValidationError("checkpoint: truncated payload");
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderConfig& config,
                     const Parameters& params, const CenterState* state) {
    config.validate();
    json header;
    header["format"] = "lvr-checkpoint-v1";
    header["config"] = {{"input_dim", config.input_dim},
                        {"hidden_dims", config.hidden_dims},
                        {"embedding_dim", config.embedding_dim},
                        {"n_classes", config.n_classes},
                        {"activation", to_string(config.activation)},
                        {"init_seed", config.init_seed}};
    header["param_count"] = config.param_count();
    if (state) {
        header["center_state"] = {{"omega", state->omega},
                                  {"initialized", state->initialized}};
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    out << header.dump() << '\n';
    const std::vector<double> flat = params.flatten();
    write_doubles(out, flat.data(), flat.size());
    if (state) write_doubles(out, state->centers.data(), state->centers.size());
    if (!out) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("checkpoint: missing header");
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != "lvr-checkpoint-v1")
        throw ValidationError("checkpoint: bad header in '" + path + "'");

    Checkpoint ck;
    const json& c = header.at("config");
    ck.config.input_dim = c.at("input_dim").get<std::size_t>();
    ck.config.hidden_dims = c.at("hidden_dims").get<std::vector<std::size_t>>();
    ck.config.embedding_dim = c.at("embedding_dim").get<std::size_t>();
    ck.config.n_classes = c.at("n_classes").get<std::size_t>();
    ck.config.activation = activation_from_string(c.at("activation").get<std::string>());
    ck.config.init_seed = c.at("init_seed").get<std::uint64_t>();
    ck.config.validate();

    std::vector<double> flat(header.at("param_count").get<std::size_t>());
    read_doubles(in, flat.data(), flat.size());
    ck.params = Parameters::unflatten(ck.config, flat);

    if (header.contains("center_state")) {
        const json& s = header.at("center_state");
        CenterState state(ck.config.n_classes, ck.config.embedding_dim,
                          s.at("omega").get<double>());
        state.initialized = s.at("initialized").get<std::vector<std::uint8_t>>();
        if (state.initialized.size() != ck.config.n_classes)
            throw ValidationError("checkpoint: initialized flag count mismatch");
        read_doubles(in, state.centers.data(), state.centers.size());
        ck.state = std::move(state);
    }
    return ck;
}

}  // namespace lvr
