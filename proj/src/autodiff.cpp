#include "lvr/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lvr/error.hpp"
#include "lvr/kernels.hpp"

namespace lvr::ad {

namespace {

void accumulate(Matrix& dst, const Matrix& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

}  // namespace

Value Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Value{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::at(Value v) { return nodes_.at(static_cast<std::size_t>(v.idx)); }
const Tape::Node& Tape::at(Value v) const { return nodes_.at(static_cast<std::size_t>(v.idx)); }

Value Tape::constant(Matrix m) {
    Node n;
    n.op = Op::Constant;
    n.val = std::move(m);
    return push(std::move(n));
}

Value Tape::param(Matrix m) {
    Node n;
    n.op = Op::Param;
    n.val = std::move(m);
    n.requires_grad = true;
    return push(std::move(n));
}

Value Tape::matmul(Value a, Value b) {
    Node n;
    n.op = Op::MatMul;
    n.a = a.idx;
    n.b = b.idx;
    n.val = kernels::matmul(at(a).val, at(b).val);
    n.requires_grad = at(a).requires_grad || at(b).requires_grad;
    return push(std::move(n));
}

Value Tape::add_rowvec(Value a, Value bias) {
    Node n;
    n.op = Op::AddRowVec;
    n.a = a.idx;
    n.b = bias.idx;
    n.val = kernels::add_rowvec(at(a).val, at(bias).val);
    n.requires_grad = at(a).requires_grad || at(bias).requires_grad;
    return push(std::move(n));
}

Value Tape::tanh(Value a) {
    Node n;
    n.op = Op::Tanh;
    n.a = a.idx;
    n.val = kernels::tanh_eval(at(a).val);
    n.requires_grad = at(a).requires_grad;
    return push(std::move(n));
}

Value Tape::relu(Value a) {
    Node n;
    n.op = Op::Relu;
    n.a = a.idx;
    n.val = kernels::relu_eval(at(a).val);
    n.requires_grad = at(a).requires_grad;
    return push(std::move(n));
}

Value Tape::softmax_ce_mean(Value logits, std::vector<int> labels) {
    Node n;
    n.op = Op::SoftmaxCEMean;
    n.a = logits.idx;
    auto ce = kernels::softmax_ce(at(logits).val, labels);
    n.val = Matrix(1, 1);
    n.val(0, 0) = ce.mean_loss;
    n.dlogits = std::move(ce.dlogits);
    n.labels = std::move(labels);
    n.requires_grad = at(logits).requires_grad;
    return push(std::move(n));
}

Value Tape::class_means(Value z, const std::vector<int>& labels,
                        const std::vector<int>& class_order) {
    const Matrix& zm = at(z).val;
    if (labels.size() != zm.rows()) throw ValidationError("class_means: label count mismatch");
    Node n;
    n.op = Op::ClassMeans;
    n.a = z.idx;
    n.members.resize(class_order.size());
    for (std::size_t p = 0; p < class_order.size(); ++p) {
        for (std::size_t r = 0; r < labels.size(); ++r)
            if (labels[r] == class_order[p]) n.members[p].push_back(r);
        if (n.members[p].empty())
            throw ValidationError("class_means: class " + std::to_string(class_order[p]) +
                                  " has no samples in the batch");
    }
    n.val = Matrix(class_order.size(), zm.cols());
    for (std::size_t p = 0; p < class_order.size(); ++p) {
        const double inv = 1.0 / static_cast<double>(n.members[p].size());
        for (std::size_t r : n.members[p])
            for (std::size_t j = 0; j < zm.cols(); ++j) n.val(p, j) += zm(r, j);
        for (std::size_t j = 0; j < zm.cols(); ++j) n.val(p, j) *= inv;
    }
    n.requires_grad = at(z).requires_grad;
    return push(std::move(n));
}

Value Tape::row_blend(Value means, std::vector<double> coeff, Matrix base) {
    const Matrix& m = at(means).val;
    if (coeff.size() != m.rows() || !base.same_shape(m))
        throw ValidationError("row_blend: shape mismatch");
    Node n;
    n.op = Op::RowBlend;
    n.a = means.idx;
    n.val = Matrix(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t j = 0; j < m.cols(); ++j)
            n.val(r, j) = coeff[r] * m(r, j) + base(r, j);
    n.coeff = std::move(coeff);
    n.requires_grad = at(means).requires_grad;
    return push(std::move(n));
}

Value Tape::dist_sum(Value z, Value centers, std::vector<int> row_center) {
    Node n;
    n.op = Op::DistSum;
    n.a = z.idx;
    n.b = centers.idx;
    const auto d = kernels::row_distances(at(z).val, at(centers).val, row_center);
    double acc = 0.0;
    for (double v : d) acc += v;
    n.val = Matrix(1, 1);
    n.val(0, 0) = acc;
    n.row_center = std::move(row_center);
    n.requires_grad = at(z).requires_grad || at(centers).requires_grad;
    return push(std::move(n));
}

Value Tape::add(Value a, Value b) {
    if (!at(a).val.same_shape(at(b).val)) throw ValidationError("add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a.idx;
    n.b = b.idx;
    n.val = at(a).val;
    accumulate(n.val, at(b).val);
    n.requires_grad = at(a).requires_grad || at(b).requires_grad;
    return push(std::move(n));
}

Value Tape::scale(Value a, double c) {
    Node n;
    n.op = Op::Scale;
    n.a = a.idx;
    n.val = at(a).val;
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val.data()[i] *= c;
    n.coeff = {c};
    n.requires_grad = at(a).requires_grad;
    return push(std::move(n));
}

Value Tape::sum_squares(Value a) {
    Node n;
    n.op = Op::SumSquares;
    n.a = a.idx;
    const Matrix& m = at(a).val;
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += m.data()[i] * m.data()[i];
    n.val = Matrix(1, 1);
    n.val(0, 0) = acc;
    n.requires_grad = at(a).requires_grad;
    return push(std::move(n));
}

const Matrix& Tape::value(Value v) const { return at(v).val; }

const Matrix& Tape::grad(Value v) const {
    const Node& n = at(v);
    if (n.grad.size() == 0)
        throw std::runtime_error("grad requested before backward (or node has no gradient)");
    return n.grad;
}

double Tape::scalar(Value v) const {
    const Matrix& m = at(v).val;
    if (m.rows() != 1 || m.cols() != 1) throw ValidationError("scalar: node is not 1x1");
    return m(0, 0);
}

void Tape::backward(Value loss) {
    Node& top = at(loss);
    if (top.val.rows() != 1 || top.val.cols() != 1)
        throw ValidationError("backward: loss must be a scalar");
    if (!std::isfinite(top.val(0, 0)))
        throw std::runtime_error("backward: loss is not finite");

    for (Node& n : nodes_)
        if (n.requires_grad) n.grad = Matrix(n.val.rows(), n.val.cols());
    top.grad(0, 0) = 1.0;

    for (int i = loss.idx; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.requires_grad || n.grad.size() == 0) continue;
        Node* na = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)] : nullptr;
        Node* nb = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)] : nullptr;
        const bool ga = na && na->requires_grad;
        const bool gb = nb && nb->requires_grad;
        switch (n.op) {
            case Op::Constant:
            case Op::Param:
                break;
            case Op::MatMul:
                if (ga) accumulate(na->grad, kernels::matmul_a_bt(n.grad, nb->val));
                if (gb) accumulate(nb->grad, kernels::matmul_at_b(na->val, n.grad));
                break;
            case Op::AddRowVec: {
                if (ga) accumulate(na->grad, n.grad);
                if (gb) {
                    const auto cs = kernels::col_sums(n.grad);
                    for (std::size_t j = 0; j < cs.size(); ++j) nb->grad(0, j) += cs[j];
                }
                break;
            }
            case Op::Tanh:
                if (ga)
                    for (std::size_t e = 0; e < n.val.size(); ++e)
                        na->grad.data()[e] +=
                            n.grad.data()[e] * (1.0 - n.val.data()[e] * n.val.data()[e]);
                break;
            case Op::Relu:
                if (ga)
                    for (std::size_t e = 0; e < n.val.size(); ++e)
                        na->grad.data()[e] += na->val.data()[e] > 0.0 ? n.grad.data()[e] : 0.0;
                break;
            case Op::SoftmaxCEMean:
                if (ga) {
                    const double g = n.grad(0, 0);
                    for (std::size_t e = 0; e < n.dlogits.size(); ++e)
                        na->grad.data()[e] += g * n.dlogits.data()[e];
                }
                break;
            case Op::ClassMeans:
                if (ga)
                    for (std::size_t p = 0; p < n.members.size(); ++p) {
                        const double inv = 1.0 / static_cast<double>(n.members[p].size());
                        for (std::size_t r : n.members[p])
                            for (std::size_t j = 0; j < n.val.cols(); ++j)
                                na->grad(r, j) += inv * n.grad(p, j);
                    }
                break;
            case Op::RowBlend:
                if (ga)
                    for (std::size_t r = 0; r < n.val.rows(); ++r)
                        for (std::size_t j = 0; j < n.val.cols(); ++j)
                            na->grad(r, j) += n.coeff[r] * n.grad(r, j);
                break;
            case Op::DistSum: {
                const double g = n.grad(0, 0);
                const Matrix& z = na->val;
                const Matrix& c = nb->val;
                for (std::size_t r = 0; r < z.rows(); ++r) {
                    const std::size_t ci = static_cast<std::size_t>(n.row_center[r]);
                    double s = 0.0;
                    for (std::size_t j = 0; j < z.cols(); ++j) {
                        const double diff = z(r, j) - c(ci, j);
                        s += diff * diff;
                    }
                    const double norm = std::sqrt(s);
                    if (norm <= 0.0) continue;  // subgradient 0 at the center
                    const double w = g / norm;
                    for (std::size_t j = 0; j < z.cols(); ++j) {
                        const double diff = z(r, j) - c(ci, j);
                        if (ga) na->grad(r, j) += w * diff;
                        if (gb) nb->grad(ci, j) -= w * diff;
                    }
                }
                break;
            }
            case Op::Add:
                if (ga) accumulate(na->grad, n.grad);
                if (gb) accumulate(nb->grad, n.grad);
                break;
            case Op::Scale:
                if (ga)
                    for (std::size_t e = 0; e < n.val.size(); ++e)
                        na->grad.data()[e] += n.coeff[0] * n.grad.data()[e];
                break;
            case Op::SumSquares:
                if (ga) {
                    const double g = n.grad(0, 0);
                    for (std::size_t e = 0; e < na->val.size(); ++e)
                        na->grad.data()[e] += 2.0 * g * na->val.data()[e];
                }
                break;
        }
    }
}

}  // namespace lvr::ad
