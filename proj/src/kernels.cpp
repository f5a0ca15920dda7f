#include "lvr/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "lvr/error.hpp"

namespace lvr::kernels {

namespace {

// Work thresholds below which the OpenMP versions skip spawning a team. The
// arithmetic is identical either way; this only avoids fork overhead on the
// small per-batch matrices that dominate training.
constexpr std::size_t kMatmulCutoff = 1u << 14;
constexpr std::size_t kElemCutoff = 1u << 15;

void check_shape(bool ok, const std::string& what) {
    if (!ok) throw ValidationError("dimension mismatch: " + what);
}

void check_labels(const std::vector<int>& labels, std::size_t m, std::size_t k) {
    check_shape(labels.size() == m, "label count " + std::to_string(labels.size()) +
                                        " vs rows " + std::to_string(m));
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw ValidationError("label out of range: " + std::to_string(y) +
                                  " (n_classes " + std::to_string(k) + ")");
}

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_shape(a.cols() == b.rows(), "matmul " + std::to_string(a.rows()) + "x" +
                                          std::to_string(a.cols()) + " * " +
                                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_shape(a.rows() == b.rows(), "matmul_at_b row counts");
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.rows(); ++k) {
            const double aki = a(k, i);
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_shape(a.cols() == b.cols(), "matmul_a_bt column counts");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            c(i, j) = s;
        }
    }
    return c;
}

Matrix add_rowvec(const Matrix& a, const Matrix& v) {
    check_shape(v.rows() == 1 && v.cols() == a.cols(), "add_rowvec");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + v(0, j);
    return c;
}

Matrix tanh_eval(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = std::tanh(a.data()[i]);
    return c;
}

Matrix relu_eval(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.data()[i];
        c.data()[i] = x > 0.0 ? x : 0.0;
    }
    return c;
}

std::vector<double> col_sums(const Matrix& a) {
    std::vector<double> s(a.cols(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, j);
        s[j] = acc;
    }
    return s;
}

namespace {

// shared per-row body so the serial and OpenMP entry points stay in lockstep
inline double softmax_ce_row(const double* l, std::size_t k, int label, double inv_m,
                             double* drow) {
    double mx = l[0];
    for (std::size_t j = 1; j < k; ++j) mx = l[j] > mx ? l[j] : mx;
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(l[j] - mx);
    const double log_z = mx + std::log(sum);
    for (std::size_t j = 0; j < k; ++j) {
        const double p = std::exp(l[j] - mx) / sum;
        drow[j] = (p - (static_cast<std::size_t>(label) == j ? 1.0 : 0.0)) * inv_m;
    }
    return log_z - l[label];
}

inline double row_distance_one(const double* zr, const double* cr, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = zr[j] - cr[j];
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace

SoftmaxCE softmax_ce(const Matrix& logits, const std::vector<int>& labels) {
    const std::size_t m = logits.rows(), k = logits.cols();
    check_labels(labels, m, k);
    if (m == 0) throw ValidationError("softmax_ce: empty batch");
    SoftmaxCE out;
    out.dlogits = Matrix(m, k);
    std::vector<double> row_loss(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
        row_loss[i] = softmax_ce_row(logits.row(i), k, labels[i], inv_m, out.dlogits.row(i));
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += row_loss[i];
    out.mean_loss = acc * inv_m;
    return out;
}

std::vector<double> row_distances(const Matrix& z, const Matrix& centers,
                                  const std::vector<int>& row_center) {
    check_shape(z.cols() == centers.cols(), "row_distances embedding width");
    check_labels(row_center, z.rows(), centers.rows());
    std::vector<double> d(z.rows());
    for (std::size_t r = 0; r < z.rows(); ++r)
        d[r] = row_distance_one(z.row(r), centers.row(static_cast<std::size_t>(row_center[r])),
                                z.cols());
    return d;
}

}  // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_shape(a.cols() == b.rows(), "matmul " + std::to_string(a.rows()) + "x" +
                                          std::to_string(a.cols()) + " * " +
                                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    Matrix c(a.rows(), b.cols());
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
    const bool par = a.rows() * a.cols() * b.cols() >= kMatmulCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < m; ++i) {
        double* ci = c.row(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(static_cast<std::size_t>(i), k);
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_shape(a.rows() == b.rows(), "matmul_at_b row counts");
    Matrix c(a.cols(), b.cols());
    const std::int64_t n = static_cast<std::int64_t>(a.cols());
    const bool par = a.rows() * a.cols() * b.cols() >= kMatmulCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < n; ++i) {
        double* ci = c.row(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < a.rows(); ++k) {
            const double aki = a(k, static_cast<std::size_t>(i));
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_shape(a.cols() == b.cols(), "matmul_a_bt column counts");
    Matrix c(a.rows(), b.rows());
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
    const bool par = a.rows() * a.cols() * b.rows() >= kMatmulCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < m; ++i) {
        const double* ai = a.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            c(static_cast<std::size_t>(i), j) = s;
        }
    }
    return c;
}

Matrix add_rowvec(const Matrix& a, const Matrix& v) {
    check_shape(v.rows() == 1 && v.cols() == a.cols(), "add_rowvec");
    Matrix c(a.rows(), a.cols());
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
    const bool par = a.size() >= kElemCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            c(static_cast<std::size_t>(i), j) = a(static_cast<std::size_t>(i), j) + v(0, j);
    return c;
}

Matrix tanh_eval(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    const bool par = a.size() >= kElemCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < n; ++i) c.data()[i] = std::tanh(a.data()[i]);
    return c;
}

Matrix relu_eval(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    const bool par = a.size() >= kElemCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = a.data()[i];
        c.data()[i] = x > 0.0 ? x : 0.0;
    }
    return c;
}

std::vector<double> col_sums(const Matrix& a) {
    std::vector<double> s(a.cols(), 0.0);
    const std::int64_t n = static_cast<std::int64_t>(a.cols());
    const bool par = a.size() >= kElemCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, static_cast<std::size_t>(j));
        s[static_cast<std::size_t>(j)] = acc;
    }
    return s;
}

SoftmaxCE softmax_ce(const Matrix& logits, const std::vector<int>& labels) {
    const std::size_t m = logits.rows(), k = logits.cols();
    check_labels(labels, m, k);
    if (m == 0) throw ValidationError("softmax_ce: empty batch");
    SoftmaxCE out;
    out.dlogits = Matrix(m, k);
    std::vector<double> row_loss(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    const std::int64_t mi = static_cast<std::int64_t>(m);
    const bool par = m * k >= kElemCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < mi; ++i)
        row_loss[static_cast<std::size_t>(i)] =
            serial::softmax_ce_row(logits.row(static_cast<std::size_t>(i)), k,
                                   labels[static_cast<std::size_t>(i)], inv_m,
                                   out.dlogits.row(static_cast<std::size_t>(i)));
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += row_loss[i];
    out.mean_loss = acc * inv_m;
    return out;
}

std::vector<double> row_distances(const Matrix& z, const Matrix& centers,
                                  const std::vector<int>& row_center) {
    check_shape(z.cols() == centers.cols(), "row_distances embedding width");
    check_labels(row_center, z.rows(), centers.rows());
    std::vector<double> d(z.rows());
    const std::int64_t m = static_cast<std::int64_t>(z.rows());
    const bool par = z.size() >= kElemCutoff;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t r = 0; r < m; ++r)
        d[static_cast<std::size_t>(r)] = serial::row_distance_one(
            z.row(static_cast<std::size_t>(r)),
            centers.row(static_cast<std::size_t>(row_center[static_cast<std::size_t>(r)])),
            z.cols());
    return d;
}

}  // namespace lvr::kernels
