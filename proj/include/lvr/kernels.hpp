#pragma once

#include <vector>

#include "lvr/matrix.hpp"

// Dense kernels used by the autodiff tape and everything above it.
//
// Each kernel comes in two flavours: the OpenMP version in lvr::kernels and a
// plain-loop reference in lvr::kernels::serial. The parallel loops are laid out
// so that every output element is produced by exactly one thread with the same
// accumulation order as the reference, so the two flavours are bitwise equal
// for any thread count. Seeded runs therefore do not depend on OMP_NUM_THREADS.

namespace lvr::kernels {

struct SoftmaxCE {
    double mean_loss = 0.0;
    Matrix dlogits;  // gradient of the mean loss w.r.t. the logits
};

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix add_rowvec(const Matrix& a, const Matrix& v);
Matrix tanh_eval(const Matrix& a);
Matrix relu_eval(const Matrix& a);
std::vector<double> col_sums(const Matrix& a);
SoftmaxCE softmax_ce(const Matrix& logits, const std::vector<int>& labels);
// Euclidean distance of each row of z to centers.row(row_center[r])
std::vector<double> row_distances(const Matrix& z, const Matrix& centers,
                                  const std::vector<int>& row_center);

}  // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
Matrix add_rowvec(const Matrix& a, const Matrix& v);
Matrix tanh_eval(const Matrix& a);
Matrix relu_eval(const Matrix& a);
std::vector<double> col_sums(const Matrix& a);
SoftmaxCE softmax_ce(const Matrix& logits, const std::vector<int>& labels);
std::vector<double> row_distances(const Matrix& z, const Matrix& centers,
                                  const std::vector<int>& row_center);

}  // namespace lvr::kernels
