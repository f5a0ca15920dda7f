#include "lvr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "lvr/error.hpp"
#include "lvr/kernels.hpp"

namespace lvr {

CenterState::CenterState(std::size_t n_classes, std::size_t embedding_dim, double omega_)
    : centers(n_classes, embedding_dim), initialized(n_classes, 0), omega(omega_) {
    if (omega < 0.0 || omega > 1.0)
        throw ValidationError("omega must be in [0, 1], got " + std::to_string(omega));
}

namespace {

std::vector<int> present_classes(const std::vector<int>& labels, std::size_t n_classes) {
    std::set<int> seen;
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
            throw ValidationError("label out of range: " + std::to_string(y));
        seen.insert(y);
    }
    return {seen.begin(), seen.end()};
}

}  // namespace

std::pair<CenterMap, CenterState> batch_centers(const Matrix& z, const std::vector<int>& labels,
                                                const CenterState& state) {
    if (z.rows() == 0) throw ValidationError("batch_centers: empty batch");
    if (z.rows() != labels.size()) throw ValidationError("batch_centers: label count mismatch");
    if (z.cols() != state.centers.cols())
        throw ValidationError("batch_centers: embedding width mismatch");

    const auto present = present_classes(labels, state.n_classes());
    CenterMap used;
    CenterState next = state;
    for (int cls : present) {
        std::vector<double> mean(z.cols(), 0.0);
        std::size_t count = 0;
        for (std::size_t r = 0; r < z.rows(); ++r) {
            if (labels[r] != cls) continue;
            for (std::size_t j = 0; j < z.cols(); ++j) mean[j] += z(r, j);
            ++count;
        }
        for (double& v : mean) v /= static_cast<double>(count);
        const std::size_t c = static_cast<std::size_t>(cls);
        if (state.initialized[c]) {
            for (std::size_t j = 0; j < z.cols(); ++j)
                mean[j] = (1.0 - state.omega) * mean[j] + state.omega * state.centers(c, j);
        }
        for (std::size_t j = 0; j < z.cols(); ++j) next.centers(c, j) = mean[j];
        next.initialized[c] = 1;
        used.emplace(cls, std::move(mean));
    }
    return {std::move(used), std::move(next)};
}

double regularization_loss(const Matrix& z, const std::vector<int>& labels,
                           const CenterMap& used_centers) {
    if (z.rows() != labels.size())
        throw ValidationError("regularization_loss: label count mismatch");
    double total = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) {
        const auto it = used_centers.find(labels[r]);
        if (it == used_centers.end())
            throw ValidationError("regularization_loss: no center for class " +
                                  std::to_string(labels[r]));
        const std::vector<double>& c = it->second;
        if (c.size() != z.cols())
            throw ValidationError("regularization_loss: center width mismatch");
        double s = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) {
            const double diff = z(r, j) - c[j];
            s += diff * diff;
        }
        total += std::sqrt(s);
    }
    return total;
}

double center_loss(const CenterMap& used_centers, const Parameters& params) {
    if (used_centers.empty()) throw ValidationError("center_loss: no centers");
    Matrix centers(used_centers.size(), used_centers.begin()->second.size());
    std::vector<int> ids;
    std::size_t r = 0;
    for (const auto& [cls, c] : used_centers) {
        for (std::size_t j = 0; j < c.size(); ++j) centers(r, j) = c[j];
        ids.push_back(cls);
        ++r;
    }
    const Matrix logits = classify(params, centers);
    return kernels::softmax_ce(logits, ids).mean_loss;
}

LossBreakdown total_loss(double task, double reg, double center, double lambda) {
    if (!std::isfinite(task) || !std::isfinite(reg) || !std::isfinite(center))
        throw std::runtime_error("total_loss: non-finite component");
    if (lambda < 0.0) throw ValidationError("lambda must be non-negative");
    LossBreakdown b;
    b.task_loss = task;
    b.reg_loss = reg;
    b.center_loss = center;
    b.lambda = lambda;
    b.total = task + lambda * reg + center;
    return b;
}

LossBreakdown LossGraph::breakdown(const ad::Tape& tape, double lambda) const {
    return total_loss(tape.scalar(task), tape.scalar(reg),
                      center ? tape.scalar(*center) : 0.0, lambda);
}

LossGraph build_total_loss(ad::Tape& tape, const ModelNodes& nodes, ad::Value embeddings,
                           const std::vector<int>& labels, const CenterState& state,
                           const LossOptions& options) {
    if (options.lambda < 0.0) throw ValidationError("lambda must be non-negative");
    // copy the shape now: tape.value references are invalidated by later pushes
    const std::size_t batch_rows = tape.value(embeddings).rows();
    const std::size_t width = tape.value(embeddings).cols();
    if (batch_rows == 0) throw ValidationError("build_total_loss: empty batch");

    LossGraph g;
    g.present = present_classes(labels, state.n_classes());

    // L_t: cross-entropy on the sample logits
    g.task = tape.softmax_ce_mean(classify_graph(tape, nodes, embeddings), labels);

    // Eq. 1: batch means blended with the stored EMA centers (history constant)
    ad::Value means = tape.class_means(embeddings, labels, g.present);
    std::vector<double> coeff(g.present.size());
    Matrix base(g.present.size(), width);
    for (std::size_t p = 0; p < g.present.size(); ++p) {
        const std::size_t cls = static_cast<std::size_t>(g.present[p]);
        if (state.initialized[cls]) {
            coeff[p] = 1.0 - state.omega;
            for (std::size_t j = 0; j < width; ++j)
                base(p, j) = state.omega * state.centers(cls, j);
        } else {
            coeff[p] = 1.0;
        }
    }
    g.used_centers = tape.row_blend(means, std::move(coeff), std::move(base));

    // Eq. 2: per-sample Euclidean pull toward the class center
    std::vector<int> row_center(labels.size());
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const auto it = std::lower_bound(g.present.begin(), g.present.end(), labels[r]);
        row_center[r] = static_cast<int>(it - g.present.begin());
    }
    g.reg = tape.dist_sum(embeddings, g.used_centers, std::move(row_center));

    ad::Value total = tape.add(g.task, tape.scale(g.reg, options.lambda));
    if (options.center_loss) {
        std::vector<int> center_labels;
        center_labels.reserve(g.present.size());
        for (int cls : g.present) center_labels.push_back(cls);
        // pad center logits to n_classes via the head; labels are the class ids
        g.center = tape.softmax_ce_mean(classify_graph(tape, nodes, g.used_centers),
                                        std::move(center_labels));
        total = tape.add(total, *g.center);
    }
    g.total = total;
    return g;
}

void commit_centers(CenterState& state, const Matrix& used, const std::vector<int>& present) {
    if (used.rows() != present.size())
        throw ValidationError("commit_centers: row count mismatch");
    for (std::size_t p = 0; p < present.size(); ++p) {
        const std::size_t cls = static_cast<std::size_t>(present[p]);
        for (std::size_t j = 0; j < used.cols(); ++j) state.centers(cls, j) = used(p, j);
        state.initialized[cls] = 1;
    }
}

}  // namespace lvr
