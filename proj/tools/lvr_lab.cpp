// lvr-lab: train a small encoder under the class-center regularizer, audit
// attribute leakage with probes, and run the four-arm ablation grid.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lvr/datagen.hpp"
#include "lvr/error.hpp"
#include "lvr/harness.hpp"
#include "lvr/probe.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lvr::ValidationError("cannot open config file '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw lvr::ValidationError("invalid JSON in '" + path + "'");
    return j;
}

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format = "table";
};

lvr::harness::ExperimentConfig resolve_config(const CommonOpts& opts) {
    lvr::harness::ExperimentConfig cfg =
        opts.config_path.empty()
            ? lvr::harness::default_experiment_config()
            : lvr::harness::parse_experiment_config(load_json_file(opts.config_path));
    if (opts.seed) {
        const std::uint64_t s = *opts.seed;
        if (cfg.synthetic) cfg.synthetic->seed = s;
        cfg.split.seed = s + 11;
        cfg.encoder.init_seed = s + 101;
        cfg.train.shuffle_seed = s + 202;
        cfg.probe.seed_base = s + 303;
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    cfg.validate();
    return cfg;
}

void emit_report(const lvr::harness::ExperimentReport& report,
                 const lvr::harness::ExperimentConfig& cfg, const std::string& format) {
    std::cout << lvr::harness::render_report(report, format);
    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        const fs::path path = fs::path(cfg.out_dir) / "report.json";
        std::ofstream out(path, std::ios::trunc);
        out << lvr::harness::render_report(report, "json");
        if (!out) throw std::runtime_error("cannot write report to '" + path.string() + "'");
        std::cerr << "report written to " << path.string() << "\n";
    }
}

// the embedding export header is e0..e{d-1},task,<attr names>
lvr::CsvSchema schema_from_embeddings_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lvr::ValidationError("cannot open embeddings file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw lvr::ValidationError("embeddings file is empty");
    lvr::CsvSchema schema;
    std::string cell;
    std::stringstream ss(line);
    bool past_task = false;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        if (cell == "task") {
            past_task = true;
            schema.task_column = cell;
        } else if (past_task) {
            schema.attr_columns.push_back(cell);
        } else {
            schema.input_columns.push_back(cell);
        }
    }
    if (!past_task)
        throw lvr::ValidationError("embeddings file has no 'task' column: '" + path + "'");
    return schema;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LVR lab: class-center regularized training and leakage probing"};
    app.require_subcommand(1);

    CommonOpts run_opts, ablate_opts;
    std::string probe_embeddings, probe_config_path, probe_format = "table";
    std::optional<std::uint64_t> probe_seed;
    std::string gen_spec_path, gen_out_path;
    std::optional<std::uint64_t> gen_seed;

    CLI::App* run = app.add_subcommand("run", "train + evaluate + probe over n_seeds");
    run->add_option("--config", run_opts.config_path, "experiment config JSON");
    run->add_option("--seed", run_opts.seed, "override the base seeds");
    run->add_option("--out-dir", run_opts.out_dir, "output directory override");
    run->add_option("--format", run_opts.format, "table or json")->default_str("table");

    CLI::App* ablate = app.add_subcommand("ablate", "four-arm (omega, center loss) ablation");
    ablate->add_option("--config", ablate_opts.config_path, "experiment config JSON");
    ablate->add_option("--seed", ablate_opts.seed, "override the base seeds");
    ablate->add_option("--out-dir", ablate_opts.out_dir, "output directory override");
    ablate->add_option("--format", ablate_opts.format, "table or json")->default_str("table");

    CLI::App* probe_cmd = app.add_subcommand("probe", "probe an embedding export CSV");
    probe_cmd->add_option("--embeddings", probe_embeddings, "embeddings CSV")->required();
    probe_cmd->add_option("--config", probe_config_path, "probe config JSON");
    probe_cmd->add_option("--seed", probe_seed, "override probe seed_base");
    probe_cmd->add_option("--format", probe_format, "table or json")->default_str("table");

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset CSV");
    gen->add_option("--spec", gen_spec_path, "synthetic spec JSON")->required();
    gen->add_option("--out", gen_out_path, "output CSV path")->required();
    gen->add_option("--seed", gen_seed, "override the spec seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*run) {
            const auto cfg = resolve_config(run_opts);
            emit_report(lvr::harness::run_experiment(cfg), cfg, run_opts.format);
        } else if (*ablate) {
            const auto cfg = resolve_config(ablate_opts);
            emit_report(lvr::harness::run_ablation(cfg), cfg, ablate_opts.format);
        } else if (*probe_cmd) {
            lvr::probe::ProbeConfig pc;
            if (!probe_config_path.empty()) {
                // strict-parse through the experiment schema
                json wrapper;
                wrapper["probe"] = load_json_file(probe_config_path);
                pc = lvr::harness::parse_experiment_config(wrapper).probe;
            } else {
                pc = lvr::harness::default_experiment_config().probe;
            }
            if (probe_seed) pc.seed_base = *probe_seed;
            const auto schema = schema_from_embeddings_header(probe_embeddings);
            const lvr::Dataset ds = lvr::load_csv(probe_embeddings, schema);
            const auto report =
                lvr::probe::train_probes(ds.inputs, ds.protected_labels, ds.attr_cardinalities,
                                         ds.attr_names, std::nullopt, pc);
            if (probe_format == "json") {
                std::cout << lvr::probe::to_json(report).dump(2) << "\n";
            } else if (probe_format == "table") {
                for (const auto& a : report.attrs) {
                    char buf[128];
                    std::snprintf(buf, sizeof(buf),
                                  "%-12s balanced_acc %.1f_%.1f  (chance %.1f)%s\n",
                                  a.attr.c_str(), 100.0 * a.mean, 100.0 * a.stddev,
                                  100.0 * a.chance, a.degenerate ? "  [degenerate]" : "");
                    std::cout << buf;
                }
            } else {
                throw lvr::ValidationError("unknown format '" + probe_format + "'");
            }
        } else if (*gen) {
            json wrapper;
            wrapper["data"]["synthetic"] = load_json_file(gen_spec_path);
            auto spec = lvr::harness::parse_experiment_config(wrapper).synthetic.value();
            if (gen_seed) spec.seed = *gen_seed;
            lvr::write_csv(lvr::generate(spec), gen_out_path);
            std::cerr << "wrote " << gen_out_path << "\n";
        }
    } catch (const lvr::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
