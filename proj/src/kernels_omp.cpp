#include <cmath>
#include <cstdint>

#include "mma/kernels.hpp"

// Parallelization pattern: split over output rows (or elements), never over
// a reduction axis. Each output element keeps the serial accumulation order,
// so results are bit-identical to the serial backend for any thread count.

namespace mma::kernels::parallel {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    if (m * k * n < kParallelCutoff) {
        serial::matmul(a, b, c, m, k, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + static_cast<std::size_t>(i) * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_grad_a(const double* g, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
    if (m * k * n < kParallelCutoff) {
        serial::matmul_grad_a(g, b, da, m, k, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        const double* gi = g + static_cast<std::size_t>(i) * n;
        double* dai = da + static_cast<std::size_t>(i) * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double* bp = b + p * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
            dai[p] += acc;
        }
    }
}

void matmul_grad_b(const double* a, const double* g, double* db,
                   std::size_t m, std::size_t k, std::size_t n) {
    if (m * k * n < kParallelCutoff) {
        serial::matmul_grad_b(a, g, db, m, k, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(k); ++p) {
        double* dbp = db + static_cast<std::size_t>(p) * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double aip = a[i * k + static_cast<std::size_t>(p)];
            const double* gi = g + i * n;
            for (std::size_t j = 0; j < n; ++j) dbp[j] += aip * gi[j];
        }
    }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    if (n < kParallelCutoff) {
        serial::add(a, b, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    if (n < kParallelCutoff) {
        serial::mul(a, b, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[i] = a[i] * b[i];
}

void scale(const double* a, double c, double* out, std::size_t n) {
    if (n < kParallelCutoff) {
        serial::scale(a, c, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[i] = a[i] * c;
}

void axpy(const double* a, double c, double* out, std::size_t n) {
    if (n < kParallelCutoff) {
        serial::axpy(a, c, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[i] += a[i] * c;
}

void tanh_forward(const double* x, double* out, std::size_t n) {
    if (n < kParallelCutoff) {
        serial::tanh_forward(x, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[i] = std::tanh(x[i]);
}

void sigmoid_forward(const double* x, double* out, std::size_t n) {
    if (n < kParallelCutoff) {
        serial::sigmoid_forward(x, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

}  // namespace mma::kernels::parallel

namespace mma::kernels {

namespace {
Backend g_backend = Backend::parallel;
}

void set_backend(Backend backend) { g_backend = backend; }
Backend backend() { return g_backend; }

#define MMA_DISPATCH(fn, ...)                \
    if (g_backend == Backend::parallel) {    \
        parallel::fn(__VA_ARGS__);           \
    } else {                                 \
        serial::fn(__VA_ARGS__);             \
    }

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    MMA_DISPATCH(matmul, a, b, c, m, k, n)
}
void matmul_grad_a(const double* g, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
    MMA_DISPATCH(matmul_grad_a, g, b, da, m, k, n)
}
void matmul_grad_b(const double* a, const double* g, double* db,
                   std::size_t m, std::size_t k, std::size_t n) {
    MMA_DISPATCH(matmul_grad_b, a, g, db, m, k, n)
}
void add(const double* a, const double* b, double* out, std::size_t n) {
    MMA_DISPATCH(add, a, b, out, n)
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
    MMA_DISPATCH(mul, a, b, out, n)
}
void scale(const double* a, double c, double* out, std::size_t n) {
    MMA_DISPATCH(scale, a, c, out, n)
}
void axpy(const double* a, double c, double* out, std::size_t n) {
    MMA_DISPATCH(axpy, a, c, out, n)
}
void tanh_forward(const double* x, double* out, std::size_t n) {
    MMA_DISPATCH(tanh_forward, x, out, n)
}
void sigmoid_forward(const double* x, double* out, std::size_t n) {
    MMA_DISPATCH(sigmoid_forward, x, out, n)
}

#undef MMA_DISPATCH

}  // namespace mma::kernels
