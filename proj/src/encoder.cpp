#include "lvr/encoder.hpp"

#include <cmath>
#include <string>

#include "lvr/error.hpp"
#include "lvr/kernels.hpp"
#include "lvr/rng.hpp"

namespace lvr {

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw ValidationError("unknown activation '" + s + "' (expected tanh or relu)");
}

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

void EncoderConfig::validate() const {
    if (input_dim == 0) throw ValidationError("encoder: input_dim must be positive");
    if (embedding_dim == 0) throw ValidationError("encoder: embedding_dim must be positive");
    if (n_classes < 2) throw ValidationError("encoder: n_classes must be >= 2");
    for (std::size_t h : hidden_dims)
        if (h == 0) throw ValidationError("encoder: hidden dims must be positive");
}

std::vector<std::size_t> EncoderConfig::layer_widths() const {
    std::vector<std::size_t> w;
    w.push_back(input_dim);
    for (std::size_t h : hidden_dims) w.push_back(h);
    w.push_back(embedding_dim);
    return w;
}

std::size_t EncoderConfig::param_count() const {
    const auto w = layer_widths();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) n += w[l] * w[l + 1] + w[l + 1];
    n += embedding_dim * n_classes + n_classes;
    return n;
}

std::vector<double> Parameters::flatten() const {
    std::vector<double> flat;
    flat.reserve(count());
    auto append = [&flat](const Matrix& m) {
        flat.insert(flat.end(), m.data(), m.data() + m.size());
    };
    for (const Layer& l : layers) {
        append(l.W);
        append(l.b);
    }
    append(head.W);
    append(head.b);
    return flat;
}

Parameters Parameters::unflatten(const EncoderConfig& config, const std::vector<double>& flat) {
    config.validate();
    if (flat.size() != config.param_count())
        throw ValidationError("unflatten: expected " + std::to_string(config.param_count()) +
                              " values, got " + std::to_string(flat.size()));
    Parameters p;
    std::size_t pos = 0;
    auto take = [&](std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = flat[pos++];
        return m;
    };
    const auto w = config.layer_widths();
    for (std::size_t l = 0; l + 1 < w.size(); ++l)
        p.layers.push_back({take(w[l], w[l + 1]), take(1, w[l + 1])});
    p.head = {take(config.embedding_dim, config.n_classes), take(1, config.n_classes)};
    return p;
}

std::size_t Parameters::count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += l.W.size() + l.b.size();
    return n + head.W.size() + head.b.size();
}

Parameters init(const EncoderConfig& config) {
    config.validate();
    Rng rng(config.init_seed);
    auto init_layer = [&rng](std::size_t fan_in, std::size_t fan_out) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Parameters::Layer l{Matrix(fan_in, fan_out), Matrix(1, fan_out)};
        for (std::size_t i = 0; i < l.W.size(); ++i) l.W.data()[i] = rng.uniform(-bound, bound);
        return l;
    };
    Parameters p;
    const auto w = config.layer_widths();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) p.layers.push_back(init_layer(w[l], w[l + 1]));
    p.head = init_layer(config.embedding_dim, config.n_classes);
    return p;
}

namespace {

Matrix activate(const Matrix& m, Activation a) {
    return a == Activation::Tanh ? kernels::tanh_eval(m) : kernels::relu_eval(m);
}

}  // namespace

Matrix forward(const EncoderConfig& config, const Parameters& params, const Matrix& inputs) {
    if (inputs.cols() != config.input_dim)
        throw ValidationError("forward: input width " + std::to_string(inputs.cols()) +
                              " != input_dim " + std::to_string(config.input_dim));
    Matrix h = inputs;
    for (const Parameters::Layer& l : params.layers)
        h = activate(kernels::add_rowvec(kernels::matmul(h, l.W), l.b), config.activation);
    return h;
}

Matrix classify(const Parameters& params, const Matrix& embeddings) {
    if (embeddings.cols() != params.head.W.rows())
        throw ValidationError("classify: embedding width " + std::to_string(embeddings.cols()) +
                              " != head input " + std::to_string(params.head.W.rows()));
    if (embeddings.rows() == 0) return Matrix(0, params.head.W.cols());
    return kernels::add_rowvec(kernels::matmul(embeddings, params.head.W), params.head.b);
}

ModelNodes register_params(ad::Tape& tape, const Parameters& params) {
    ModelNodes nodes;
    for (const Parameters::Layer& l : params.layers) {
        ad::Value w = tape.param(l.W);
        ad::Value b = tape.param(l.b);
        nodes.layers.emplace_back(w, b);
        nodes.flat_order.push_back(w);
        nodes.flat_order.push_back(b);
    }
    nodes.head = {tape.param(params.head.W), tape.param(params.head.b)};
    nodes.flat_order.push_back(nodes.head.first);
    nodes.flat_order.push_back(nodes.head.second);
    return nodes;
}

ad::Value forward_graph(ad::Tape& tape, const EncoderConfig& config, const ModelNodes& nodes,
                        ad::Value inputs) {
    ad::Value h = inputs;
    for (const auto& [w, b] : nodes.layers) {
        ad::Value pre = tape.add_rowvec(tape.matmul(h, w), b);
        h = config.activation == Activation::Tanh ? tape.tanh(pre) : tape.relu(pre);
    }
    return h;
}

ad::Value classify_graph(ad::Tape& tape, const ModelNodes& nodes, ad::Value embeddings) {
    return tape.add_rowvec(tape.matmul(embeddings, nodes.head.first), nodes.head.second);
}

std::vector<double> gradient(const EncoderConfig& config, const Parameters& params,
                             const LossBuilder& loss_fn) {
    config.validate();
    ad::Tape tape;
    ModelNodes nodes = register_params(tape, params);
    ad::Value loss = loss_fn(tape, nodes);
    tape.backward(loss);
    std::vector<double> grad;
    grad.reserve(params.count());
    for (ad::Value v : nodes.flat_order) {
        const Matrix& g = tape.grad(v);
        grad.insert(grad.end(), g.data(), g.data() + g.size());
    }
    return grad;
}

}  // namespace lvr
