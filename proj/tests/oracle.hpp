#pragma once

// Test-side oracles, deliberately independent of the library's implementation
// paths: a brute-force confusion-matrix balanced accuracy, a full-batch
// softmax-regression probe with hand-written gradients, and a central
// finite-difference gradient.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "lvr/matrix.hpp"

namespace oracle {

inline double balanced_accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                                std::size_t n_values) {
    std::vector<std::vector<std::size_t>> confusion(n_values,
                                                    std::vector<std::size_t>(n_values, 0));
    for (std::size_t i = 0; i < labels.size(); ++i)
        ++confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(preds[i])];
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t v = 0; v < n_values; ++v) {
        std::size_t row_total = 0;
        for (std::size_t w = 0; w < n_values; ++w) row_total += confusion[v][w];
        if (row_total == 0) continue;
        sum += static_cast<double>(confusion[v][v]) / static_cast<double>(row_total);
        ++present;
    }
    return sum / static_cast<double>(present);
}

// Multinomial logistic regression, full-batch gradient descent from zero init.
struct LinearProbe {
    lvr::Matrix w;  // d x v
    std::vector<double> b;

    std::vector<int> predict(const lvr::Matrix& x) const {
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::size_t best = 0;
            double best_v = -1e300;
            for (std::size_t v = 0; v < w.cols(); ++v) {
                double s = b[v];
                for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j) * w(j, v);
                if (s > best_v) {
                    best_v = s;
                    best = v;
                }
            }
            out[i] = static_cast<int>(best);
        }
        return out;
    }
};

inline LinearProbe train_linear_probe(const lvr::Matrix& x, const std::vector<int>& y,
                                      std::size_t n_values, int iters = 300,
                                      double lr = 0.5) {
    const std::size_t m = x.rows(), d = x.cols();
    LinearProbe p{lvr::Matrix(d, n_values), std::vector<double>(n_values, 0.0)};
    std::vector<double> probs(n_values);
    lvr::Matrix gw(d, n_values);
    std::vector<double> gb(n_values);
    for (int it = 0; it < iters; ++it) {
        for (std::size_t e = 0; e < gw.size(); ++e) gw.data()[e] = 0.0;
        for (auto& v : gb) v = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double mx = -1e300;
            for (std::size_t v = 0; v < n_values; ++v) {
                double s = p.b[v];
                for (std::size_t j = 0; j < d; ++j) s += x(i, j) * p.w(j, v);
                probs[v] = s;
                mx = s > mx ? s : mx;
            }
            double z = 0.0;
            for (std::size_t v = 0; v < n_values; ++v) z += std::exp(probs[v] - mx);
            for (std::size_t v = 0; v < n_values; ++v) {
                const double g =
                    std::exp(probs[v] - mx) / z -
                    (static_cast<std::size_t>(y[i]) == v ? 1.0 : 0.0);
                gb[v] += g;
                for (std::size_t j = 0; j < d; ++j) gw(j, v) += g * x(i, j);
            }
        }
        const double scale = lr / static_cast<double>(m);
        for (std::size_t e = 0; e < gw.size(); ++e) p.w.data()[e] -= scale * gw.data()[e];
        for (std::size_t v = 0; v < n_values; ++v) p.b[v] -= scale * gb[v];
    }
    return p;
}

inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// relative agreement check used by the gradient criteria
inline bool grads_match(const std::vector<double>& analytic, const std::vector<double>& fd,
                        double rel_tol = 1e-4, double active = 1e-8) {
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        if (std::abs(analytic[i]) <= active) continue;
        const double denom = std::max(std::abs(analytic[i]), std::abs(fd[i]));
        if (std::abs(analytic[i] - fd[i]) / denom > rel_tol) return false;
    }
    return true;
}

}  // namespace oracle
