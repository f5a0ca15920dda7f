#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lvr/error.hpp"

namespace lvr {

struct SgdOptimizer {
    double lr;

    explicit SgdOptimizer(double lr_) : lr(lr_) {}

    void step(std::vector<double>& p, const std::vector<double>& g) {
        if (p.size() != g.size()) throw ValidationError("sgd: size mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    }
};

struct AdamOptimizer {
    double lr;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m, v;
    long t = 0;

    explicit AdamOptimizer(double lr_) : lr(lr_) {}

    void step(std::vector<double>& p, const std::vector<double>& g) {
        if (p.size() != g.size()) throw ValidationError("adam: size mismatch");
        if (m.empty()) {
            m.assign(p.size(), 0.0);
            v.assign(p.size(), 0.0);
        }
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

}  // namespace lvr
