#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lvr/datagen.hpp"
#include "lvr/encoder.hpp"
#include "lvr/losses.hpp"

namespace lvr {

enum class Optimizer { Sgd, Adam };

Optimizer optimizer_from_string(const std::string& s);
std::string to_string(Optimizer o);

struct TrainConfig {
    std::size_t epochs = 15;
    // at lambda = 0.1 the per-sample pull of the summed distance loss is 0.1,
    // so the mean task loss needs batches small enough that 1/batch stays
    // comfortably above it; 32 lets the regularizer flatten the classes
    std::size_t batch_size = 10;
    double learning_rate = 5e-4;
    Optimizer optimizer = Optimizer::Adam;
    double lambda = 0.1;
    double omega = 0.3;
    bool enable_center_loss = true;
    std::uint64_t shuffle_seed = 0;

    void validate() const;
};

struct TrainReport {
    std::vector<LossBreakdown> epoch_losses;          // per-epoch batch averages
    std::map<std::string, double> final_accuracy;     // per non-empty split
    double wall_seconds = 0.0;
    TrainConfig config;
    std::uint64_t seed = 0;
};

struct TrainResult {
    Parameters params;
    CenterState state;
    TrainReport report;
};

// Seeded mini-batch training under total = task + lambda * reg + center.
// Center state persists across batches and epochs; a non-finite batch loss
// aborts with the offending epoch/batch in the message.
TrainResult train(const Dataset& dataset, const EncoderConfig& encoder_config,
                  const TrainConfig& train_config);

// Fraction of split samples whose argmax logit matches the task label; logit
// ties resolve to the lowest class id.
double evaluate(const EncoderConfig& config, const Parameters& params, const Dataset& dataset,
                Split split);

// CSV rows of d embedding values, the task label and all protected labels;
// header e0..e{d-1},task,<attr names>; doubles printed with 17 significant digits.
void export_embeddings(const EncoderConfig& config, const Parameters& params,
                       const Dataset& dataset, Split split, const std::string& path);

}  // namespace lvr
