#pragma once

#include <cstddef>

namespace mma::kernels {

// Data-parallel inner loops used by the tensor ops and the recurrent cells.
// Two implementations share one contract: `serial::` is the reference,
// `parallel::` is the OpenMP version. Both produce bit-identical results:
// every output element is computed by exactly one thread with the same
// per-element arithmetic order, so parallelism never reorders a reduction.

enum class Backend { serial, parallel };

// Process-wide dispatch for the unqualified wrappers below.
void set_backend(Backend backend);
Backend backend();

// Work-size threshold below which the parallel backend falls back to the
// serial loop (spawning threads on tiny inputs costs more than it saves).
inline constexpr std::size_t kParallelCutoff = 16384;

namespace serial {

// c[m x n] = a[m x k] * b[k x n]
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);

// da[m x k] += g[m x n] * b^T   (b is [k x n])
void matmul_grad_a(const double* g, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);

// db[k x n] += a^T * g          (a is [m x k])
void matmul_grad_b(const double* a, const double* g, double* db,
                   std::size_t m, std::size_t k, std::size_t n);

void add(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double c, double* out, std::size_t n);
// out[i] += a[i] * c
void axpy(const double* a, double c, double* out, std::size_t n);
void tanh_forward(const double* x, double* out, std::size_t n);
void sigmoid_forward(const double* x, double* out, std::size_t n);

}  // namespace serial

namespace parallel {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_a(const double* g, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_b(const double* a, const double* g, double* db,
                   std::size_t m, std::size_t k, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double c, double* out, std::size_t n);
void axpy(const double* a, double c, double* out, std::size_t n);
void tanh_forward(const double* x, double* out, std::size_t n);
void sigmoid_forward(const double* x, double* out, std::size_t n);

}  // namespace parallel

// Dispatching wrappers; these are what the ops call.
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_a(const double* g, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_b(const double* a, const double* g, double* db,
                   std::size_t m, std::size_t k, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double c, double* out, std::size_t n);
void axpy(const double* a, double c, double* out, std::size_t n);
void tanh_forward(const double* x, double* out, std::size_t n);
void sigmoid_forward(const double* x, double* out, std::size_t n);

}  // namespace mma::kernels
