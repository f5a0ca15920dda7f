#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lvr/autodiff.hpp"
#include "lvr/matrix.hpp"

namespace lvr {

enum class Activation { Tanh, Relu };

Activation activation_from_string(const std::string& s);  // throws ValidationError
std::string to_string(Activation a);

struct EncoderConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t embedding_dim = 0;
    std::size_t n_classes = 0;
    Activation activation = Activation::Tanh;
    std::uint64_t init_seed = 0;

    void validate() const;
    std::size_t param_count() const;
    // widths of the encoder layers: input_dim, hidden..., embedding_dim
    std::vector<std::size_t> layer_widths() const;
};

// Encoder layer weights plus the linear classifier head. flatten() lays the
// values out layer by layer (W row-major, then b), head last; unflatten is the
// exact inverse.
struct Parameters {
    struct Layer {
        Matrix W;  // in x out
        Matrix b;  // 1 x out
    };
    std::vector<Layer> layers;  // hidden layers + the embedding layer
    Layer head;                 // embedding_dim x n_classes

    std::vector<double> flatten() const;
    static Parameters unflatten(const EncoderConfig& config, const std::vector<double>& flat);
    std::size_t count() const;
};

Parameters init(const EncoderConfig& config);

Matrix forward(const EncoderConfig& config, const Parameters& params, const Matrix& inputs);
Matrix classify(const Parameters& params, const Matrix& embeddings);

// ---- autodiff bridge ----

struct ModelNodes {
    std::vector<std::pair<ad::Value, ad::Value>> layers;  // (W, b)
    std::pair<ad::Value, ad::Value> head;
    std::vector<ad::Value> flat_order;  // every node, in flatten() order
};

ModelNodes register_params(ad::Tape& tape, const Parameters& params);
ad::Value forward_graph(ad::Tape& tape, const EncoderConfig& config, const ModelNodes& nodes,
                        ad::Value inputs);
ad::Value classify_graph(ad::Tape& tape, const ModelNodes& nodes, ad::Value embeddings);

// Builds an arbitrary scalar loss from the registered parameter nodes.
using LossBuilder = std::function<ad::Value(ad::Tape&, const ModelNodes&)>;

// Exact gradient of loss_fn w.r.t. flatten(params). Throws std::runtime_error
// if the loss comes out non-finite.
std::vector<double> gradient(const EncoderConfig& config, const Parameters& params,
                             const LossBuilder& loss_fn);

}  // namespace lvr
