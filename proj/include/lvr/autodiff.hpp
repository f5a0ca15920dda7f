#pragma once

#include <vector>

#include "lvr/matrix.hpp"

// Minimal define-by-run reverse-mode tape over the dense kernels. Scalars are
// 1x1 matrices. Nodes are evaluated eagerly on construction; backward() walks
// the tape in reverse insertion order, which is a valid topological order.

namespace lvr::ad {

struct Value {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

enum class Op {
    Constant,
    Param,
    MatMul,
    AddRowVec,
    Tanh,
    Relu,
    SoftmaxCEMean,
    ClassMeans,
    RowBlend,
    DistSum,
    Add,
    Scale,
    SumSquares,
};

class Tape {
public:
    Value constant(Matrix m);
    Value param(Matrix m);

    Value matmul(Value a, Value b);
    Value add_rowvec(Value a, Value bias);
    Value tanh(Value a);
    Value relu(Value a);

    // mean cross-entropy of row-wise softmax against integer labels -> scalar
    Value softmax_ce_mean(Value logits, std::vector<int> labels);

    // per-class mean of the rows of z, one output row per entry of class_order;
    // every listed class must occur in labels
    Value class_means(Value z, const std::vector<int>& labels, const std::vector<int>& class_order);

    // out.row(r) = coeff[r] * in.row(r) + base.row(r); base is a constant
    Value row_blend(Value means, std::vector<double> coeff, Matrix base);

    // sum over rows r of || z.row(r) - centers.row(row_center[r]) || -> scalar
    Value dist_sum(Value z, Value centers, std::vector<int> row_center);

    Value add(Value a, Value b);        // same-shape elementwise
    Value scale(Value a, double c);
    Value sum_squares(Value a);         // sum of squared entries -> scalar

    const Matrix& value(Value v) const;
    const Matrix& grad(Value v) const;
    double scalar(Value v) const;

    // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node with
    // requires_grad. Throws if the loss is not a finite scalar.
    void backward(Value loss);

private:
    struct Node {
        Op op;
        int a = -1, b = -1;
        Matrix val;
        Matrix grad;
        bool requires_grad = false;
        // op payloads
        std::vector<int> labels;
        std::vector<std::vector<std::size_t>> members;  // ClassMeans, DistSum
        std::vector<int> row_center;                    // DistSum
        std::vector<double> coeff;                      // RowBlend
        Matrix dlogits;                                 // SoftmaxCEMean cache
    };

    Value push(Node n);
    Node& at(Value v);
    const Node& at(Value v) const;

    std::vector<Node> nodes_;
};

}  // namespace lvr::ad
