#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvr/encoder.hpp"
#include "lvr/matrix.hpp"

// Leakage audit: several independently seeded probes (one hidden tanh layer +
// linear output) are trained on frozen embeddings to predict each protected
// attribute; leakage is reported as balanced accuracy against the chance level.

namespace lvr::probe {

struct ProbeConfig {
    std::size_t n_probes = 5;
    std::size_t hidden_dim = 0;  // 0 = min(128, 4 * embedding_dim)
    std::size_t epochs = 40;
    double learning_rate = 1e-4;
    Activation activation = Activation::Tanh;  // the probe protocol is tanh-only
    std::uint64_t seed_base = 0;

    void validate() const;
    std::size_t resolve_hidden(std::size_t embedding_dim) const;
};

struct AttrProbeResult {
    std::string attr;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_probe;
    double chance = 0.0;   // 1 / n_attr_values, rendered next to every score
    bool degenerate = false;  // single attribute value in the probe-train side
};

struct ProbeReport {
    std::vector<AttrProbeResult> attrs;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

// Mean per-value recall; values with no true samples are excluded from the mean.
double balanced_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                         std::size_t n_values);

// Trains n_probes probes per attribute on the rows where train_mask is true and
// scores balanced accuracy on the rest. Without a mask, rows are put in a
// canonical content order and every fifth row becomes test (80/20). Row order
// is normalized internally, so jointly permuting rows does not change results.
ProbeReport train_probes(const Matrix& embeddings,
                         const std::vector<std::vector<int>>& protected_labels,
                         const std::vector<std::size_t>& cardinalities,
                         const std::vector<std::string>& attr_names,
                         const std::optional<std::vector<bool>>& train_mask,
                         const ProbeConfig& config);

nlohmann::json to_json(const ProbeReport& report);
ProbeReport report_from_json(const nlohmann::json& j);

}  // namespace lvr::probe
