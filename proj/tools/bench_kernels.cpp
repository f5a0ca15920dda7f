// Times the OpenMP kernels against the serial reference and checks that both
// produce bitwise-identical results. Run with OMP_NUM_THREADS to vary the team.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <omp.h>
#include <string>
#include <vector>

#include "lvr/kernels.hpp"
#include "lvr/matrix.hpp"
#include "lvr/rng.hpp"

using lvr::Matrix;
namespace k = lvr::kernels;

namespace {

Matrix random_matrix(lvr::Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const std::string& name, double serial_ms, double omp_ms, bool equal) {
    std::printf("%-22s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx   %s\n",
                name.c_str(), serial_ms, omp_ms, serial_ms / omp_ms,
                equal ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    int reps = 5;
    std::size_t scale = 1;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
        else if (arg == "--scale" && i + 1 < argc) scale = static_cast<std::size_t>(std::atoi(argv[++i]));
        else {
            std::printf("usage: bench_kernels [--reps N] [--scale S]\n");
            return 1;
        }
    }
    std::printf("threads: %d, reps: %d, scale: %zu\n", omp_get_max_threads(), reps, scale);

    lvr::Rng rng(42);
    bool all_equal = true;

    {
        const Matrix a = random_matrix(rng, 384 * scale, 256);
        const Matrix b = random_matrix(rng, 256, 256);
        Matrix rs, rp;
        const double ts = time_ms([&] { rs = k::serial::matmul(a, b); }, reps);
        const double tp = time_ms([&] { rp = k::matmul(a, b); }, reps);
        const bool eq = bitwise_equal(rs, rp);
        all_equal &= eq;
        report("matmul", ts, tp, eq);
    }
    {
        const Matrix a = random_matrix(rng, 2048 * scale, 128);
        const Matrix b = random_matrix(rng, 2048 * scale, 64);
        Matrix rs, rp;
        const double ts = time_ms([&] { rs = k::serial::matmul_at_b(a, b); }, reps);
        const double tp = time_ms([&] { rp = k::matmul_at_b(a, b); }, reps);
        const bool eq = bitwise_equal(rs, rp);
        all_equal &= eq;
        report("matmul_at_b", ts, tp, eq);
    }
    {
        const Matrix a = random_matrix(rng, 1024 * scale, 256);
        const Matrix b = random_matrix(rng, 512, 256);
        Matrix rs, rp;
        const double ts = time_ms([&] { rs = k::serial::matmul_a_bt(a, b); }, reps);
        const double tp = time_ms([&] { rp = k::matmul_a_bt(a, b); }, reps);
        const bool eq = bitwise_equal(rs, rp);
        all_equal &= eq;
        report("matmul_a_bt", ts, tp, eq);
    }
    {
        const Matrix a = random_matrix(rng, 2048 * scale, 512);
        Matrix rs, rp;
        const double ts = time_ms([&] { rs = k::serial::tanh_eval(a); }, reps);
        const double tp = time_ms([&] { rp = k::tanh_eval(a); }, reps);
        const bool eq = bitwise_equal(rs, rp);
        all_equal &= eq;
        report("tanh", ts, tp, eq);
    }
    {
        const Matrix logits = random_matrix(rng, 8192 * scale, 32);
        std::vector<int> labels(logits.rows());
        for (auto& y : labels) y = static_cast<int>(rng.below(32));
        k::SoftmaxCE rs, rp;
        const double ts = time_ms([&] { rs = k::serial::softmax_ce(logits, labels); }, reps);
        const double tp = time_ms([&] { rp = k::softmax_ce(logits, labels); }, reps);
        const bool eq = bitwise_equal(rs.dlogits, rp.dlogits) && rs.mean_loss == rp.mean_loss;
        all_equal &= eq;
        report("softmax_ce", ts, tp, eq);
    }
    {
        const Matrix z = random_matrix(rng, 8192 * scale, 128);
        const Matrix centers = random_matrix(rng, 64, 128);
        std::vector<int> rc(z.rows());
        for (auto& c : rc) c = static_cast<int>(rng.below(64));
        std::vector<double> rs, rp;
        const double ts = time_ms([&] { rs = k::serial::row_distances(z, centers, rc); }, reps);
        const double tp = time_ms([&] { rp = k::row_distances(z, centers, rc); }, reps);
        const bool eq = bitwise_equal(rs, rp);
        all_equal &= eq;
        report("row_distances", ts, tp, eq);
    }

    if (!all_equal) {
        std::printf("FAIL: kernel outputs diverged\n");
        return 1;
    }
    return 0;
}
