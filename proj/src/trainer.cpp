#include "lvr/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lvr/error.hpp"
#include "lvr/optim.hpp"
#include "lvr/rng.hpp"

namespace lvr {

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "sgd") return Optimizer::Sgd;
    if (s == "adam") return Optimizer::Adam;
    throw ValidationError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

std::string to_string(Optimizer o) { return o == Optimizer::Sgd ? "sgd" : "adam"; }

void TrainConfig::validate() const {
    if (epochs == 0) throw ValidationError("train: epochs must be positive");
    if (batch_size == 0) throw ValidationError("train: batch_size must be >= 1");
    if (learning_rate < 0.0) throw ValidationError("train: learning_rate must be >= 0");
    if (lambda < 0.0) throw ValidationError("train: lambda must be >= 0");
    if (omega < 0.0 || omega > 1.0) throw ValidationError("train: omega must be in [0, 1]");
}

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(idx[i], j);
    return out;
}

}  // namespace

TrainResult train(const Dataset& dataset, const EncoderConfig& encoder_config,
                  const TrainConfig& train_config) {
    dataset.validate();
    encoder_config.validate();
    train_config.validate();
    const auto train_idx = dataset.split_indices(Split::Train);
    if (train_idx.empty()) throw ValidationError("train: empty train split");

    const auto t0 = std::chrono::steady_clock::now();

    Parameters params = init(encoder_config);
    CenterState state(encoder_config.n_classes, encoder_config.embedding_dim,
                      train_config.omega);
    SgdOptimizer sgd(train_config.learning_rate);
    AdamOptimizer adam(train_config.learning_rate);
    const LossOptions options{train_config.lambda, train_config.enable_center_loss};

    TrainReport report;
    report.config = train_config;
    report.seed = train_config.shuffle_seed;

    std::vector<std::size_t> order = train_idx;
    for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(train_config.shuffle_seed, epoch));
        shuffle_rng.shuffle(order);

        LossBreakdown epoch_sum;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
            const std::size_t end = std::min(start + train_config.batch_size, order.size());
            const std::vector<std::size_t> batch_idx(order.begin() + start, order.begin() + end);
            const Matrix xb = gather_rows(dataset.inputs, batch_idx);
            std::vector<int> yb(batch_idx.size());
            for (std::size_t i = 0; i < batch_idx.size(); ++i)
                yb[i] = dataset.task_labels[batch_idx[i]];

            ad::Tape tape;
            const ModelNodes nodes = register_params(tape, params);
            const ad::Value inputs = tape.constant(xb);
            const ad::Value z = forward_graph(tape, encoder_config, nodes, inputs);
            LossBreakdown breakdown;
            std::vector<double> grad;
            Matrix used;
            std::vector<int> present;
            try {
                const LossGraph g =
                    build_total_loss(tape, nodes, z, yb, state, options);
                breakdown = g.breakdown(tape, options.lambda);
                tape.backward(g.total);
                used = tape.value(g.used_centers);
                present = g.present;
                grad.reserve(params.count());
                for (ad::Value v : nodes.flat_order) {
                    const Matrix& gm = tape.grad(v);
                    grad.insert(grad.end(), gm.data(), gm.data() + gm.size());
                }
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("train: aborted at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(n_batches) + ": " +
                                         e.what());
            }

            std::vector<double> flat = params.flatten();
            if (train_config.optimizer == Optimizer::Adam)
                adam.step(flat, grad);
            else
                sgd.step(flat, grad);
            params = Parameters::unflatten(encoder_config, flat);
            commit_centers(state, used, present);

            epoch_sum.task_loss += breakdown.task_loss;
            epoch_sum.reg_loss += breakdown.reg_loss;
            epoch_sum.center_loss += breakdown.center_loss;
            epoch_sum.total += breakdown.total;
            ++n_batches;
        }
        LossBreakdown epoch_avg;
        epoch_avg.lambda = options.lambda;
        const double inv = 1.0 / static_cast<double>(n_batches);
        epoch_avg.task_loss = epoch_sum.task_loss * inv;
        epoch_avg.reg_loss = epoch_sum.reg_loss * inv;
        epoch_avg.center_loss = epoch_sum.center_loss * inv;
        epoch_avg.total = epoch_sum.total * inv;
        report.epoch_losses.push_back(epoch_avg);
    }

    for (Split s : {Split::Train, Split::Val, Split::Test})
        if (!dataset.split_indices(s).empty())
            report.final_accuracy[to_string(s)] = evaluate(encoder_config, params, dataset, s);

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(params), std::move(state), std::move(report)};
}

double evaluate(const EncoderConfig& config, const Parameters& params, const Dataset& dataset,
                Split split) {
    const auto idx = dataset.split_indices(split);
    if (idx.empty()) throw ValidationError("evaluate: empty split " + to_string(split));
    const Matrix logits =
        classify(params, forward(config, params, gather_rows(dataset.inputs, idx)));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (logits(i, j) > logits(i, best)) best = j;  // ties keep the lowest id
        if (static_cast<int>(best) == dataset.task_labels[idx[i]]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

void export_embeddings(const EncoderConfig& config, const Parameters& params,
                       const Dataset& dataset, Split split, const std::string& path) {
    const auto idx = dataset.split_indices(split);
    if (idx.empty())
        throw ValidationError("export_embeddings: empty split " + to_string(split));
    const Matrix z = forward(config, params, gather_rows(dataset.inputs, idx));

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("export_embeddings: cannot open '" + path + "'");
    for (std::size_t j = 0; j < z.cols(); ++j) out << "e" << j << ",";
    out << "task";
    for (const auto& name : dataset.attr_names) out << "," << name;
    out << "\n";
    char buf[40];
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < z.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", z(i, j));
            out << buf << ",";
        }
        out << dataset.task_labels[idx[i]];
        for (const auto& attr : dataset.protected_labels) out << "," << attr[idx[i]];
        out << "\n";
    }
    if (!out) throw std::runtime_error("export_embeddings: write failed for '" + path + "'");
}

}  // namespace lvr
