#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lvr/autodiff.hpp"
#include "lvr/encoder.hpp"
#include "lvr/matrix.hpp"

// Class-center regularization: per-batch class centers blended with an EMA of
// previous batches, a per-sample Euclidean pull toward the class center, a
// classification loss on the centers themselves, and the combined objective
//
//   total = task + lambda * reg + center
//
// The EMA history term is a constant during backprop: gradients flow into the
// current batch's contribution to each center, never into previous steps.

namespace lvr {

struct CenterState {
    Matrix centers;                         // n_classes x embedding_dim
    std::vector<std::uint8_t> initialized;  // per class; uninitialized rows are never read
    double omega = 0.3;                     // EMA weight of the previous center

    CenterState() = default;
    CenterState(std::size_t n_classes, std::size_t embedding_dim, double omega_);
    std::size_t n_classes() const { return initialized.size(); }
};

struct LossBreakdown {
    double task_loss = 0.0;
    double reg_loss = 0.0;
    double center_loss = 0.0;
    double lambda = 0.0;
    double total = 0.0;
};

using CenterMap = std::map<int, std::vector<double>>;

// Centers used for this batch plus the advanced state. Classes absent from the
// batch keep their stored center and flag. A first-seen singleton class gets
// the sample itself as its center; once a class has history the EMA blend
// applies even to singletons.
std::pair<CenterMap, CenterState> batch_centers(const Matrix& z, const std::vector<int>& labels,
                                                const CenterState& state);

// Sum over samples of the Euclidean distance to the sample's class center.
double regularization_loss(const Matrix& z, const std::vector<int>& labels,
                           const CenterMap& used_centers);

// Mean cross-entropy of classify(center_i) against label i over present classes.
double center_loss(const CenterMap& used_centers, const Parameters& params);

LossBreakdown total_loss(double task, double reg, double center, double lambda);

// ---- tape construction for the trainer ----

struct LossOptions {
    double lambda = 0.1;
    bool center_loss = true;
};

struct LossGraph {
    ad::Value total;
    ad::Value task;
    ad::Value reg;
    std::optional<ad::Value> center;
    ad::Value used_centers;     // values feed commit_centers after the step
    std::vector<int> present;   // ascending class ids present in the batch
    LossBreakdown breakdown(const ad::Tape& tape, double lambda) const;
};

LossGraph build_total_loss(ad::Tape& tape, const ModelNodes& nodes, ad::Value embeddings,
                           const std::vector<int>& labels, const CenterState& state,
                           const LossOptions& options);

// Stores the blended centers (detached values) back into the state.
void commit_centers(CenterState& state, const Matrix& used, const std::vector<int>& present);

}  // namespace lvr
