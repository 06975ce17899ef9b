// Kernel benchmark: OpenMP implementations against the serial references.
// Prints a table of median timings and speedups; run manually, not via ctest.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <omp.h>

#include "poro/kernels.hpp"
#include "poro/rng.hpp"
#include "poro/solve.hpp"

using namespace poro;

namespace {

double time_median(const std::function<void()>& fn, int reps = 5) {
    std::vector<double> times;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void report(const char* name, Index n, double serial, double parallel) {
    std::printf("%-22s n=%6lld   serial %10.6f s   openmp %10.6f s   speedup %5.2fx\n", name,
                static_cast<long long>(n), serial, parallel, serial / parallel);
}

SparseMatrix laplacian_2d(Index n) {
    // Five-point stencil on an n x n grid.
    std::vector<std::tuple<Index, Index, double>> trips;
    auto idx = [n](Index i, Index j) { return i * n + j; };
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            trips.emplace_back(idx(i, j), idx(i, j), 4.0);
            if (i > 0) trips.emplace_back(idx(i, j), idx(i - 1, j), -1.0);
            if (i + 1 < n) trips.emplace_back(idx(i, j), idx(i + 1, j), -1.0);
            if (j > 0) trips.emplace_back(idx(i, j), idx(i, j - 1), -1.0);
            if (j + 1 < n) trips.emplace_back(idx(i, j), idx(i, j + 1), -1.0);
        }
    return SparseMatrix::from_triplets(n * n, n * n, std::move(trips));
}

}  // namespace

int main() {
    std::printf("threads: %d\n\n", omp_get_max_threads());
    SplitMix64 rng(7);

    for (Index n : {512, 1024, 2048}) {
        DenseMatrix m = random_matrix(rng, n, n);
        Vector x = random_vector(rng, n);
        Vector y(n);
        const double ts = time_median([&] {
            for (int i = 0; i < 20; ++i) kernels::serial::matvec(m, x.span(), y.span());
        });
        const double tp = time_median([&] {
            for (int i = 0; i < 20; ++i) kernels::matvec(m, x.span(), y.span());
        });
        report("dense matvec x20", n, ts, tp);
    }
    std::printf("\n");

    for (Index n : {128, 256}) {
        SparseMatrix lap = laplacian_2d(n);
        Vector x = random_vector(rng, lap.cols());
        Vector y(lap.rows());
        const double ts = time_median([&] {
            for (int i = 0; i < 50; ++i) kernels::serial::matvec(lap, x.span(), y.span());
        });
        const double tp = time_median([&] {
            for (int i = 0; i < 50; ++i) kernels::matvec(lap, x.span(), y.span());
        });
        report("csr matvec x50", lap.rows(), ts, tp);
    }
    std::printf("\n");

    for (Index n : {512, 1024}) {
        DenseMatrix spd = random_spd(rng, n, static_cast<double>(n));
        const double tp = time_median([&] { CholeskyFactor f(spd); }, 3);
        std::printf("%-22s n=%6lld   openmp %10.6f s\n", "cholesky factor", static_cast<long long>(n),
                    tp);
    }
    std::printf("\n");

    {
        const Index n = 128;
        SparseMatrix lap = laplacian_2d(n);
        Vector b = random_vector(rng, lap.rows());
        SpdOptions opts;
        opts.method = SpdMethod::cg;
        opts.tol = 1e-10;
        const double tcg = time_median([&] { solve_spd(lap, b, opts); }, 3);
        std::printf("%-22s n=%6lld   cg+jacobi %7.4f s\n", "cg laplacian", lap.rows(), tcg);
    }
    return 0;
}
