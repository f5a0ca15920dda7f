#include "lvr/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lvr/error.hpp"
#include "lvr/optim.hpp"
#include "lvr/rng.hpp"

namespace lvr::probe {

namespace {

constexpr std::size_t kProbeBatch = 16;

}

void ProbeConfig::validate() const {
    if (n_probes == 0) throw ValidationError("probe: n_probes must be >= 1");
    if (epochs == 0) throw ValidationError("probe: epochs must be positive");
    if (learning_rate <= 0.0) throw ValidationError("probe: learning_rate must be positive");
    if (activation != Activation::Tanh)
        throw ValidationError("probe: activation is fixed to tanh");
}

std::size_t ProbeConfig::resolve_hidden(std::size_t embedding_dim) const {
    if (hidden_dim > 0) return hidden_dim;
    return std::min<std::size_t>(128, 4 * embedding_dim);
}

double balanced_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                         std::size_t n_values) {
    if (labels.empty()) throw ValidationError("balanced_accuracy: empty input");
    if (predictions.size() != labels.size())
        throw ValidationError("balanced_accuracy: size mismatch");
    std::vector<std::size_t> total(n_values, 0), correct(n_values, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i], p = predictions[i];
        if (y < 0 || static_cast<std::size_t>(y) >= n_values)
            throw ValidationError("balanced_accuracy: label out of range");
        if (p < 0 || static_cast<std::size_t>(p) >= n_values)
            throw ValidationError("balanced_accuracy: prediction out of range");
        ++total[static_cast<std::size_t>(y)];
        if (p == y) ++correct[static_cast<std::size_t>(y)];
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t v = 0; v < n_values; ++v) {
        if (total[v] == 0) continue;  // undefined recall, excluded from the mean
        sum += static_cast<double>(correct[v]) / static_cast<double>(total[v]);
        ++present;
    }
    return sum / static_cast<double>(present);
}

namespace {

// Content-keyed canonical row order: embeddings lexicographically, then the
// protected labels, then the caller's mask bit. Duplicate rows are
// interchangeable, so any input permutation sorts to the same sequence.
std::vector<std::size_t> canonical_order(const Matrix& z,
                                         const std::vector<std::vector<int>>& labels,
                                         const std::vector<bool>* mask) {
    std::vector<std::size_t> order(z.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t j = 0; j < z.cols(); ++j) {
            if (z(a, j) < z(b, j)) return true;
            if (z(a, j) > z(b, j)) return false;
        }
        for (const auto& attr : labels) {
            if (attr[a] < attr[b]) return true;
            if (attr[a] > attr[b]) return false;
        }
        if (mask) return static_cast<int>((*mask)[a]) < static_cast<int>((*mask)[b]);
        return false;
    });
    return order;
}

struct ProbeNet {
    EncoderConfig config;
    Parameters params;
};

ProbeNet make_probe(std::size_t input_dim, std::size_t hidden, std::size_t n_values,
                    std::uint64_t seed) {
    ProbeNet net;
    net.config.input_dim = input_dim;
    net.config.hidden_dims = {};
    net.config.embedding_dim = hidden;  // single tanh layer, then the linear head
    net.config.n_classes = n_values;
    net.config.activation = Activation::Tanh;
    net.config.init_seed = seed;
    net.params = init(net.config);
    return net;
}

std::vector<int> predict(const ProbeNet& net, const Matrix& x) {
    const Matrix logits = classify(net.params, forward(net.config, net.params, x));
    std::vector<int> pred(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (logits(i, j) > logits(i, best)) best = j;
        pred[i] = static_cast<int>(best);
    }
    return pred;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(idx[i], j);
    return out;
}

}  // namespace

ProbeReport train_probes(const Matrix& embeddings,
                         const std::vector<std::vector<int>>& protected_labels,
                         const std::vector<std::size_t>& cardinalities,
                         const std::vector<std::string>& attr_names,
                         const std::optional<std::vector<bool>>& train_mask,
                         const ProbeConfig& config) {
    config.validate();
    if (protected_labels.size() != cardinalities.size() ||
        protected_labels.size() != attr_names.size())
        throw ValidationError("train_probes: attribute metadata mismatch");
    for (const auto& attr : protected_labels)
        if (attr.size() != embeddings.rows())
            throw ValidationError("train_probes: label count mismatch");
    if (train_mask && train_mask->size() != embeddings.rows())
        throw ValidationError("train_probes: mask size mismatch");

    const std::vector<bool>* mask_ptr = train_mask ? &*train_mask : nullptr;
    const auto order = canonical_order(embeddings, protected_labels, mask_ptr);

    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t row = order[rank];
        const bool is_train = train_mask ? (*train_mask)[row] : (rank % 5 != 4);
        (is_train ? train_rows : test_rows).push_back(row);
    }
    if (train_rows.empty() || test_rows.empty())
        throw ValidationError("train_probes: partition must be non-empty on both sides");

    const Matrix x_train = take_rows(embeddings, train_rows);
    const Matrix x_test = take_rows(embeddings, test_rows);
    const std::size_t hidden = config.resolve_hidden(embeddings.cols());

    ProbeReport report;
    report.train_rows = train_rows.size();
    report.test_rows = test_rows.size();

    for (std::size_t a = 0; a < protected_labels.size(); ++a) {
        AttrProbeResult res;
        res.attr = attr_names[a];
        res.chance = 1.0 / static_cast<double>(cardinalities[a]);

        std::vector<int> y_train(train_rows.size()), y_test(test_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i)
            y_train[i] = protected_labels[a][train_rows[i]];
        for (std::size_t i = 0; i < test_rows.size(); ++i)
            y_test[i] = protected_labels[a][test_rows[i]];

        const std::set<int> distinct(y_train.begin(), y_train.end());
        if (distinct.size() < 2) {
            // degenerate probe: nothing to learn, reported as chance
            res.degenerate = true;
            res.per_probe.assign(config.n_probes, res.chance);
            res.mean = res.chance;
            res.stddev = 0.0;
            report.attrs.push_back(std::move(res));
            continue;
        }

        for (std::size_t p = 0; p < config.n_probes; ++p) {
            ProbeNet net = make_probe(embeddings.cols(), hidden, cardinalities[a],
                                      config.seed_base + p);
            AdamOptimizer adam(config.learning_rate);
            Rng order_rng(mix_seed(config.seed_base + p, 7919 * (a + 1)));
            std::vector<std::size_t> batch_order(x_train.rows());
            std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});

            for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
                order_rng.shuffle(batch_order);
                for (std::size_t start = 0; start < batch_order.size(); start += kProbeBatch) {
                    const std::size_t end = std::min(start + kProbeBatch, batch_order.size());
                    const std::vector<std::size_t> rows(batch_order.begin() + start,
                                                        batch_order.begin() + end);
                    const Matrix xb = take_rows(x_train, rows);
                    std::vector<int> yb(rows.size());
                    for (std::size_t i = 0; i < rows.size(); ++i) yb[i] = y_train[rows[i]];

                    ad::Tape tape;
                    const ModelNodes nodes = register_params(tape, net.params);
                    const ad::Value z =
                        forward_graph(tape, net.config, nodes, tape.constant(xb));
                    const ad::Value loss =
                        tape.softmax_ce_mean(classify_graph(tape, nodes, z), yb);
                    tape.backward(loss);
                    std::vector<double> grad;
                    grad.reserve(net.params.count());
                    for (ad::Value v : nodes.flat_order) {
                        const Matrix& g = tape.grad(v);
                        grad.insert(grad.end(), g.data(), g.data() + g.size());
                    }
                    std::vector<double> flat = net.params.flatten();
                    adam.step(flat, grad);
                    net.params = Parameters::unflatten(net.config, flat);
                }
            }
            res.per_probe.push_back(
                balanced_accuracy(predict(net, x_test), y_test, cardinalities[a]));
        }
        double mean = 0.0;
        for (double v : res.per_probe) mean += v;
        mean /= static_cast<double>(res.per_probe.size());
        double var = 0.0;
        for (double v : res.per_probe) var += (v - mean) * (v - mean);
        var /= static_cast<double>(res.per_probe.size());
        res.mean = mean;
        res.stddev = std::sqrt(var);
        report.attrs.push_back(std::move(res));
    }
    return report;
}

nlohmann::json to_json(const ProbeReport& report) {
    nlohmann::json j;
    j["train_rows"] = report.train_rows;
    j["test_rows"] = report.test_rows;
    j["attributes"] = nlohmann::json::array();
    for (const auto& a : report.attrs) {
        j["attributes"].push_back({{"attr", a.attr},
                                   {"mean", a.mean},
                                   {"std", a.stddev},
                                   {"per_probe", a.per_probe},
                                   {"chance", a.chance},
                                   {"degenerate", a.degenerate}});
    }
    return j;
}

ProbeReport report_from_json(const nlohmann::json& j) {
    ProbeReport r;
    r.train_rows = j.at("train_rows").get<std::size_t>();
    r.test_rows = j.at("test_rows").get<std::size_t>();
    for (const auto& a : j.at("attributes")) {
        AttrProbeResult res;
        res.attr = a.at("attr").get<std::string>();
        res.mean = a.at("mean").get<double>();
        res.stddev = a.at("std").get<double>();
        res.per_probe = a.at("per_probe").get<std::vector<double>>();
        res.chance = a.at("chance").get<double>();
        res.degenerate = a.at("degenerate").get<bool>();
        r.attrs.push_back(std::move(res));
    }
    return r;
}

}  // namespace lvr::probe
