#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvr/datagen.hpp"
#include "lvr/encoder.hpp"
#include "lvr/probe.hpp"
#include "lvr/trainer.hpp"

// Experiment orchestration: multi-seed runs of train -> evaluate -> export ->
// probe, the four-arm ablation grid over (omega, center loss), and table/JSON
// rendering. Reports carry the full resolved config and no wall-clock values,
// so identical configs re-render byte for byte.

namespace lvr::harness {

inline constexpr const char* kArtifactVersion = "lvr-lab 0.1.0";

struct SplitSpec {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
    std::uint64_t seed = 1234;
};

struct CsvSource {
    std::string path;
    CsvSchema schema;
};

struct ExperimentConfig {
    std::optional<SyntheticSpec> synthetic;  // exactly one of synthetic / csv
    std::optional<CsvSource> csv;
    SplitSpec split;            // applied when the data carries no split tags
    bool split_explicit = false;
    EncoderConfig encoder;      // input_dim / n_classes of 0 are inferred from data
    TrainConfig train;
    probe::ProbeConfig probe;
    std::size_t n_seeds = 3;
    std::string out_dir = "lvr_out";  // empty = write no artifacts

    void validate() const;
};

ExperimentConfig default_experiment_config();

// Strict parser: unknown keys anywhere are errors.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

struct SeedResult {
    std::size_t seed_index = 0;
    std::map<std::string, double> task_accuracy;  // per non-empty split
    probe::ProbeReport probes;
};

struct ArmResult {
    std::string name;
    double lambda = 0.0;
    double omega = 0.0;
    bool center_loss = true;
    std::string status = "ok";  // "ok" | "failed"
    std::string error;
    std::vector<SeedResult> seeds;

    double mean_task_accuracy(const std::string& split) const;
    double mean_probe_accuracy(const std::string& attr) const;
    double std_probe_accuracy(const std::string& attr) const;
};

struct ExperimentReport {
    std::string artifact = kArtifactVersion;
    ExperimentConfig config;
    std::vector<ArmResult> arms;
};

// Per seed s the component seeds shift deterministically: data seed + s,
// split seed + s, init seed + s, shuffle seed + s, probe seed_base + 100000*s.
Dataset materialize_dataset(const ExperimentConfig& config, std::size_t seed_index);

ArmResult run_arm(const ExperimentConfig& config, const std::string& name,
                  const TrainConfig& train_config);

ExperimentReport run_experiment(const ExperimentConfig& config);

// Four arms sharing data and seeds, differing only in (omega, center loss):
// both removed, omega only, center loss only, full method.
ExperimentReport run_ablation(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

// format is "table" (mean with std subscript per arm) or "json" (lossless)
std::string render_report(const ExperimentReport& report, const std::string& format);

}  // namespace lvr::harness
