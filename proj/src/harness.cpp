#include "lvr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "lvr/checkpoint.hpp"
#include "lvr/error.hpp"

namespace lvr::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError("config: '" + ctx + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ValidationError("config: unknown key '" + key + "' in " + ctx);
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t dflt,
                      const std::string& ctx) {
    const json* v = find(obj, key);
    if (!v) return dflt;
    if (!v->is_number_integer() && !v->is_number_unsigned())
        throw ValidationError("config: '" + ctx + "." + key + "' must be an integer");
    return v->get<std::uint64_t>();
}

std::size_t get_size(const json& obj, const char* key, std::size_t dflt,
                     const std::string& ctx) {
    const json* v = find(obj, key);
    if (!v) return dflt;
    if (!v->is_number_integer() || (v->is_number_integer() && v->get<long long>() < 0))
        throw ValidationError("config: '" + ctx + "." + key + "' must be a non-negative integer");
    return v->get<std::size_t>();
}

double get_num(const json& obj, const char* key, double dflt, const std::string& ctx) {
    const json* v = find(obj, key);
    if (!v) return dflt;
    if (!v->is_number()) throw ValidationError("config: '" + ctx + "." + key + "' must be a number");
    return v->get<double>();
}

bool get_bool(const json& obj, const char* key, bool dflt, const std::string& ctx) {
    const json* v = find(obj, key);
    if (!v) return dflt;
    if (!v->is_boolean()) throw ValidationError("config: '" + ctx + "." + key + "' must be a boolean");
    return v->get<bool>();
}

std::string get_str(const json& obj, const char* key, const std::string& dflt,
                    const std::string& ctx) {
    const json* v = find(obj, key);
    if (!v) return dflt;
    if (!v->is_string()) throw ValidationError("config: '" + ctx + "." + key + "' must be a string");
    return v->get<std::string>();
}

template <typename T>
std::vector<T> get_vec(const json& obj, const char* key, std::vector<T> dflt,
                       const std::string& ctx) {
    const json* v = find(obj, key);
    if (!v) return dflt;
    if (!v->is_array()) throw ValidationError("config: '" + ctx + "." + key + "' must be an array");
    try {
        return v->get<std::vector<T>>();
    } catch (const json::exception&) {
        throw ValidationError("config: bad element type in '" + ctx + "." + key + "'");
    }
}

SyntheticSpec parse_synthetic(const json& j) {
    check_keys(j, "data.synthetic",
               {"n_samples", "n_classes", "n_attr_values", "input_dim", "task_strength",
                "attr_strength", "noise_std", "seed"});
    const SyntheticSpec d = default_experiment_config().synthetic.value();
    SyntheticSpec s;
    s.n_samples = get_size(j, "n_samples", d.n_samples, "data.synthetic");
    s.n_classes = get_size(j, "n_classes", d.n_classes, "data.synthetic");
    s.n_attr_values = get_vec<std::size_t>(j, "n_attr_values", d.n_attr_values, "data.synthetic");
    s.input_dim = get_size(j, "input_dim", d.input_dim, "data.synthetic");
    s.task_strength = get_num(j, "task_strength", d.task_strength, "data.synthetic");
    s.attr_strength = get_vec<double>(j, "attr_strength", d.attr_strength, "data.synthetic");
    s.noise_std = get_num(j, "noise_std", d.noise_std, "data.synthetic");
    s.seed = get_u64(j, "seed", d.seed, "data.synthetic");
    return s;
}

CsvSource parse_csv(const json& j) {
    check_keys(j, "data.csv", {"path", "schema"});
    CsvSource c;
    c.path = get_str(j, "path", "", "data.csv");
    if (c.path.empty()) throw ValidationError("config: 'data.csv.path' is required");
    const json* sj = find(j, "schema");
    if (!sj) throw ValidationError("config: 'data.csv.schema' is required");
    check_keys(*sj, "data.csv.schema", {"inputs", "task", "attrs", "split"});
    c.schema.input_columns = get_vec<std::string>(*sj, "inputs", {}, "data.csv.schema");
    c.schema.task_column = get_str(*sj, "task", "", "data.csv.schema");
    c.schema.attr_columns = get_vec<std::string>(*sj, "attrs", {}, "data.csv.schema");
    c.schema.split_column = get_str(*sj, "split", "", "data.csv.schema");
    return c;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (synthetic.has_value() == csv.has_value())
        throw ValidationError("config: exactly one of data.synthetic / data.csv is required");
    if (synthetic) synthetic->validate();
    if (csv) {
        if (!fs::exists(csv->path))
            throw ValidationError("config: csv file '" + csv->path + "' does not exist");
        if (split_explicit && !csv->schema.split_column.empty())
            throw ValidationError(
                "config: 'split' section conflicts with the csv split column");
    }
    if (split.train < 0 || split.val < 0 || split.test < 0 ||
        std::abs(split.train + split.val + split.test - 1.0) > 1e-9)
        throw ValidationError("config: split fractions must be non-negative and sum to 1");
    if (encoder.embedding_dim == 0)
        throw ValidationError("config: encoder.embedding_dim must be positive");
    for (std::size_t h : encoder.hidden_dims)
        if (h == 0) throw ValidationError("config: encoder hidden dims must be positive");
    train.validate();
    probe.validate();
    if (n_seeds == 0) throw ValidationError("config: n_seeds must be >= 1");
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig c;
    SyntheticSpec spec;
    spec.n_samples = 2000;
    spec.n_classes = 4;
    spec.n_attr_values = {2};
    spec.input_dim = 32;
    spec.task_strength = 2.0;
    spec.attr_strength = {2.0};
    spec.noise_std = 0.5;
    spec.seed = 7;
    c.synthetic = spec;
    c.encoder.input_dim = 0;  // inferred
    c.encoder.hidden_dims = {};
    c.encoder.embedding_dim = 16;
    c.encoder.n_classes = 0;  // inferred
    // relu keeps the baseline arm's within-class variance (and with it the
    // attribute signal) alive; saturating activations already squash it
    c.encoder.activation = Activation::Relu;
    c.encoder.init_seed = 101;
    // train/probe defaults already carry the paper values
    c.train.shuffle_seed = 202;
    c.probe.seed_base = 303;
    return c;
}

ExperimentConfig parse_experiment_config(const json& j) {
    check_keys(j, "config", {"data", "split", "encoder", "train", "probe", "n_seeds", "out_dir"});
    ExperimentConfig c = default_experiment_config();

    if (const json* data = find(j, "data")) {
        check_keys(*data, "data", {"synthetic", "csv"});
        const json* syn = find(*data, "synthetic");
        const json* csv = find(*data, "csv");
        if ((syn != nullptr) == (csv != nullptr))
            throw ValidationError("config: 'data' needs exactly one of synthetic / csv");
        if (syn) {
            c.synthetic = parse_synthetic(*syn);
        } else {
            c.synthetic.reset();
            c.csv = parse_csv(*csv);
        }
    }

    if (const json* sp = find(j, "split")) {
        check_keys(*sp, "split", {"fractions", "seed"});
        c.split_explicit = true;
        const auto fr =
            get_vec<double>(*sp, "fractions", {c.split.train, c.split.val, c.split.test}, "split");
        if (fr.size() != 3)
            throw ValidationError("config: 'split.fractions' must have 3 entries");
        c.split.train = fr[0];
        c.split.val = fr[1];
        c.split.test = fr[2];
        c.split.seed = get_u64(*sp, "seed", c.split.seed, "split");
    }

    if (const json* enc = find(j, "encoder")) {
        check_keys(*enc, "encoder",
                   {"input_dim", "hidden_dims", "embedding_dim", "n_classes", "activation",
                    "init_seed"});
        c.encoder.input_dim = get_size(*enc, "input_dim", 0, "encoder");
        c.encoder.hidden_dims =
            get_vec<std::size_t>(*enc, "hidden_dims", c.encoder.hidden_dims, "encoder");
        c.encoder.embedding_dim =
            get_size(*enc, "embedding_dim", c.encoder.embedding_dim, "encoder");
        c.encoder.n_classes = get_size(*enc, "n_classes", 0, "encoder");
        c.encoder.activation = activation_from_string(
            get_str(*enc, "activation", to_string(c.encoder.activation), "encoder"));
        c.encoder.init_seed = get_u64(*enc, "init_seed", c.encoder.init_seed, "encoder");
    }

    if (const json* tr = find(j, "train")) {
        check_keys(*tr, "train",
                   {"epochs", "batch_size", "learning_rate", "optimizer", "lambda", "omega",
                    "enable_center_loss", "shuffle_seed"});
        c.train.epochs = get_size(*tr, "epochs", c.train.epochs, "train");
        c.train.batch_size = get_size(*tr, "batch_size", c.train.batch_size, "train");
        c.train.learning_rate = get_num(*tr, "learning_rate", c.train.learning_rate, "train");
        c.train.optimizer =
            optimizer_from_string(get_str(*tr, "optimizer", to_string(c.train.optimizer), "train"));
        c.train.lambda = get_num(*tr, "lambda", c.train.lambda, "train");
        c.train.omega = get_num(*tr, "omega", c.train.omega, "train");
        c.train.enable_center_loss =
            get_bool(*tr, "enable_center_loss", c.train.enable_center_loss, "train");
        c.train.shuffle_seed = get_u64(*tr, "shuffle_seed", c.train.shuffle_seed, "train");
    }

    if (const json* pr = find(j, "probe")) {
        check_keys(*pr, "probe",
                   {"n_probes", "hidden_dim", "epochs", "learning_rate", "activation",
                    "seed_base"});
        c.probe.n_probes = get_size(*pr, "n_probes", c.probe.n_probes, "probe");
        c.probe.hidden_dim = get_size(*pr, "hidden_dim", c.probe.hidden_dim, "probe");
        c.probe.epochs = get_size(*pr, "epochs", c.probe.epochs, "probe");
        c.probe.learning_rate = get_num(*pr, "learning_rate", c.probe.learning_rate, "probe");
        c.probe.activation =
            activation_from_string(get_str(*pr, "activation", "tanh", "probe"));
        c.probe.seed_base = get_u64(*pr, "seed_base", c.probe.seed_base, "probe");
    }

    c.n_seeds = get_size(j, "n_seeds", c.n_seeds, "config");
    c.out_dir = get_str(j, "out_dir", c.out_dir, "config");
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    if (c.synthetic) {
        const SyntheticSpec& s = *c.synthetic;
        j["data"]["synthetic"] = {{"n_samples", s.n_samples},
                                  {"n_classes", s.n_classes},
                                  {"n_attr_values", s.n_attr_values},
                                  {"input_dim", s.input_dim},
                                  {"task_strength", s.task_strength},
                                  {"attr_strength", s.attr_strength},
                                  {"noise_std", s.noise_std},
                                  {"seed", s.seed}};
    } else {
        j["data"]["csv"] = {{"path", c.csv->path},
                            {"schema",
                             {{"inputs", c.csv->schema.input_columns},
                              {"task", c.csv->schema.task_column},
                              {"attrs", c.csv->schema.attr_columns},
                              {"split", c.csv->schema.split_column}}}};
    }
    const bool data_has_split = c.csv && !c.csv->schema.split_column.empty();
    if (!data_has_split)
        j["split"] = {{"fractions", {c.split.train, c.split.val, c.split.test}},
                      {"seed", c.split.seed}};
    j["encoder"] = {{"input_dim", c.encoder.input_dim},
                    {"hidden_dims", c.encoder.hidden_dims},
                    {"embedding_dim", c.encoder.embedding_dim},
                    {"n_classes", c.encoder.n_classes},
                    {"activation", to_string(c.encoder.activation)},
                    {"init_seed", c.encoder.init_seed}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"learning_rate", c.train.learning_rate},
                  {"optimizer", to_string(c.train.optimizer)},
                  {"lambda", c.train.lambda},
                  {"omega", c.train.omega},
                  {"enable_center_loss", c.train.enable_center_loss},
                  {"shuffle_seed", c.train.shuffle_seed}};
    j["probe"] = {{"n_probes", c.probe.n_probes},
                  {"hidden_dim", c.probe.hidden_dim},
                  {"epochs", c.probe.epochs},
                  {"learning_rate", c.probe.learning_rate},
                  {"activation", "tanh"},
                  {"seed_base", c.probe.seed_base}};
    j["n_seeds"] = c.n_seeds;
    j["out_dir"] = c.out_dir;
    return j;
}

double ArmResult::mean_task_accuracy(const std::string& split) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const SeedResult& s : seeds) {
        const auto it = s.task_accuracy.find(split);
        if (it == s.task_accuracy.end()) continue;
        sum += it->second;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double ArmResult::mean_probe_accuracy(const std::string& attr) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const SeedResult& s : seeds)
        for (const auto& a : s.probes.attrs)
            if (a.attr == attr) {
                sum += a.mean;
                ++n;
            }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double ArmResult::std_probe_accuracy(const std::string& attr) const {
    const double mean = mean_probe_accuracy(attr);
    double var = 0.0;
    std::size_t n = 0;
    for (const SeedResult& s : seeds)
        for (const auto& a : s.probes.attrs)
            if (a.attr == attr) {
                var += (a.mean - mean) * (a.mean - mean);
                ++n;
            }
    return n ? std::sqrt(var / static_cast<double>(n)) : 0.0;
}

namespace {

EncoderConfig resolve_encoder(const EncoderConfig& base, const Dataset& ds,
                              std::size_t seed_index) {
    EncoderConfig e = base;
    if (e.input_dim == 0)
        e.input_dim = ds.inputs.cols();
    else if (e.input_dim != ds.inputs.cols())
        throw ValidationError("config: encoder.input_dim " + std::to_string(e.input_dim) +
                              " does not match data width " + std::to_string(ds.inputs.cols()));
    if (e.n_classes == 0)
        e.n_classes = ds.n_classes;
    else if (e.n_classes != ds.n_classes)
        throw ValidationError("config: encoder.n_classes does not match the data");
    e.init_seed = base.init_seed + seed_index;
    e.validate();
    return e;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(idx[i], j);
    return out;
}

SeedResult run_seed(const ExperimentConfig& cfg, const TrainConfig& train_base,
                    std::size_t seed_index, const std::string& arm_name) {
    const Dataset ds = materialize_dataset(cfg, seed_index);
    const EncoderConfig enc = resolve_encoder(cfg.encoder, ds, seed_index);
    TrainConfig tc = train_base;
    tc.shuffle_seed = train_base.shuffle_seed + seed_index;
    const TrainResult tr = train(ds, enc, tc);

    SeedResult res;
    res.seed_index = seed_index;
    res.task_accuracy = tr.report.final_accuracy;

    if (!cfg.out_dir.empty()) {
        const fs::path dir =
            fs::path(cfg.out_dir) / arm_name / ("seed" + std::to_string(seed_index));
        fs::create_directories(dir);
        export_embeddings(enc, tr.params, ds, Split::Train, (dir / "embeddings.csv").string());
        save_checkpoint((dir / "checkpoint.bin").string(), enc, tr.params, &tr.state);
    }

    // probe the train-split embeddings with the internal 80/20 partition
    const auto idx = ds.split_indices(Split::Train);
    const Matrix z = forward(enc, tr.params, take_rows(ds.inputs, idx));
    std::vector<std::vector<int>> labels(ds.protected_labels.size());
    for (std::size_t a = 0; a < ds.protected_labels.size(); ++a) {
        labels[a].reserve(idx.size());
        for (std::size_t i : idx) labels[a].push_back(ds.protected_labels[a][i]);
    }
    probe::ProbeConfig pc = cfg.probe;
    pc.seed_base = cfg.probe.seed_base + 100000ull * seed_index;
    res.probes = probe::train_probes(z, labels, ds.attr_cardinalities, ds.attr_names,
                                     std::nullopt, pc);
    return res;
}

}  // namespace

Dataset materialize_dataset(const ExperimentConfig& cfg, std::size_t seed_index) {
    Dataset ds;
    bool has_split = false;
    if (cfg.synthetic) {
        SyntheticSpec spec = *cfg.synthetic;
        spec.seed += seed_index;
        ds = generate(spec);
    } else {
        ds = load_csv(cfg.csv->path, cfg.csv->schema);
        has_split = !cfg.csv->schema.split_column.empty();
    }
    if (!has_split)
        ds = split(ds, cfg.split.train, cfg.split.val, cfg.split.test,
                   cfg.split.seed + seed_index);
    return ds;
}

ArmResult run_arm(const ExperimentConfig& cfg, const std::string& name,
                  const TrainConfig& train_config) {
    ArmResult arm;
    arm.name = name;
    arm.lambda = train_config.lambda;
    arm.omega = train_config.omega;
    arm.center_loss = train_config.enable_center_loss;
    try {
        for (std::size_t s = 0; s < cfg.n_seeds; ++s)
            arm.seeds.push_back(run_seed(cfg, train_config, s, name));
    } catch (const std::exception& e) {
        arm.status = "failed";
        arm.error = e.what();
    }
    return arm;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;
    report.arms.push_back(run_arm(cfg, "main", cfg.train));
    return report;
}

ExperimentReport run_ablation(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;

    auto variant = [&cfg](double omega, bool center) {
        TrainConfig t = cfg.train;
        t.omega = omega;
        t.enable_center_loss = center;
        return t;
    };
    report.arms.push_back(run_arm(cfg, "no_omega_no_center", variant(0.0, false)));
    report.arms.push_back(run_arm(cfg, "omega_only", variant(cfg.train.omega, false)));
    report.arms.push_back(run_arm(cfg, "center_only", variant(0.0, true)));
    report.arms.push_back(run_arm(cfg, "full", variant(cfg.train.omega, true)));
    return report;
}

namespace {

json aggregate_arm(const ArmResult& arm) {
    json agg;
    if (arm.seeds.empty()) return agg;
    std::set<std::string> split_names;
    for (const SeedResult& s : arm.seeds)
        for (const auto& [name, _] : s.task_accuracy) split_names.insert(name);
    for (const std::string& name : split_names) {
        std::vector<double> vals;
        for (const SeedResult& s : arm.seeds) {
            const auto it = s.task_accuracy.find(name);
            if (it != s.task_accuracy.end()) vals.push_back(it->second);
        }
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(vals.size());
        agg["task_accuracy"][name] = {{"mean", mean}, {"std", std::sqrt(var)}};
    }
    std::vector<std::string> attrs;
    for (const auto& a : arm.seeds.front().probes.attrs) attrs.push_back(a.attr);
    agg["probes"] = json::array();
    for (const std::string& attr : attrs) {
        double chance = 0.0;
        for (const auto& a : arm.seeds.front().probes.attrs)
            if (a.attr == attr) chance = a.chance;
        agg["probes"].push_back({{"attr", attr},
                                 {"mean", arm.mean_probe_accuracy(attr)},
                                 {"std", arm.std_probe_accuracy(attr)},
                                 {"chance", chance}});
    }
    return agg;
}

}  // namespace

json to_json(const ExperimentReport& report) {
    json j;
    j["artifact"] = report.artifact;
    j["config"] = to_json(report.config);
    j["arms"] = json::array();
    for (const ArmResult& arm : report.arms) {
        json a;
        a["name"] = arm.name;
        a["lambda"] = arm.lambda;
        a["omega"] = arm.omega;
        a["center_loss"] = arm.center_loss;
        a["status"] = arm.status;
        a["error"] = arm.error;
        a["seeds"] = json::array();
        for (const SeedResult& s : arm.seeds) {
            a["seeds"].push_back({{"seed_index", s.seed_index},
                                  {"task_accuracy", s.task_accuracy},
                                  {"probes", probe::to_json(s.probes)}});
        }
        a["aggregate"] = aggregate_arm(arm);
        j["arms"].push_back(std::move(a));
    }
    return j;
}

ExperimentReport report_from_json(const json& j) {
    ExperimentReport report;
    report.artifact = j.at("artifact").get<std::string>();
    report.config = parse_experiment_config(j.at("config"));
    for (const json& a : j.at("arms")) {
        ArmResult arm;
        arm.name = a.at("name").get<std::string>();
        arm.lambda = a.at("lambda").get<double>();
        arm.omega = a.at("omega").get<double>();
        arm.center_loss = a.at("center_loss").get<bool>();
        arm.status = a.at("status").get<std::string>();
        arm.error = a.at("error").get<std::string>();
        for (const json& s : a.at("seeds")) {
            SeedResult seed;
            seed.seed_index = s.at("seed_index").get<std::size_t>();
            seed.task_accuracy = s.at("task_accuracy").get<std::map<std::string, double>>();
            seed.probes = probe::report_from_json(s.at("probes"));
            arm.seeds.push_back(std::move(seed));
        }
        report.arms.push_back(std::move(arm));
    }
    return report;
}

namespace {

std::string pct(double v, double s) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.1f_%.1f", 100.0 * v, 100.0 * s);
    return buf;
}

}  // namespace

std::string render_report(const ExperimentReport& report, const std::string& format) {
    if (format == "json") return to_json(report).dump(2) + "\n";
    if (format != "table")
        throw ValidationError("unknown report format '" + format + "' (expected table or json)");

    // pick the evaluation split: test when available, else val, else train
    std::string eval_split = "train";
    for (const ArmResult& arm : report.arms)
        for (const SeedResult& s : arm.seeds) {
            if (s.task_accuracy.count("test")) eval_split = "test";
            else if (s.task_accuracy.count("val") && eval_split == "train") eval_split = "val";
        }

    std::vector<std::string> attrs;
    std::vector<double> chances;
    for (const ArmResult& arm : report.arms)
        for (const SeedResult& s : arm.seeds)
            for (const auto& a : s.probes.attrs)
                if (std::find(attrs.begin(), attrs.end(), a.attr) == attrs.end()) {
                    attrs.push_back(a.attr);
                    chances.push_back(a.chance);
                }

    std::ostringstream out;
    out << report.artifact << "\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"arm", "Task^(" + eval_split + ")"};
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "Probe_v(%s, chance %.1f)", attrs[i].c_str(),
                      100.0 * chances[i]);
        header.push_back(buf);
    }
    rows.push_back(header);
    for (const ArmResult& arm : report.arms) {
        std::vector<std::string> row{arm.name};
        if (arm.status != "ok") {
            row.push_back("FAILED: " + arm.error);
            for (std::size_t i = 0; i < attrs.size(); ++i) row.push_back("-");
        } else {
            std::vector<double> acc;
            for (const SeedResult& s : arm.seeds) {
                const auto it = s.task_accuracy.find(eval_split);
                if (it != s.task_accuracy.end()) acc.push_back(it->second);
            }
            double mean = 0.0, var = 0.0;
            if (!acc.empty()) {
                for (double v : acc) mean += v;
                mean /= static_cast<double>(acc.size());
                for (double v : acc) var += (v - mean) * (v - mean);
                var /= static_cast<double>(acc.size());
            }
            row.push_back(pct(mean, std::sqrt(var)));
            for (const std::string& attr : attrs)
                row.push_back(pct(arm.mean_probe_accuracy(attr), arm.std_probe_accuracy(attr)));
        }
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size())
                out << std::string(widths[c] - row[c].size() + 2, ' ');
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace lvr::harness
