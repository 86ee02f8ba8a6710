#include <cmath>

#include "mma/kernels.hpp"

namespace mma::kernels::serial {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_grad_a(const double* g, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
    // da[i][p] += sum_j g[i][j] * b[p][j]
    for (std::size_t i = 0; i < m; ++i) {
        const double* gi = g + i * n;
        double* dai = da + i * k;
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
    // db[p][j] += sum_i a[i][p] * g[i][j]
    for (std::size_t p = 0; p < k; ++p) {
        double* dbp = db + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double aip = a[i * k + p];
            const double* gi = g + i * n;
            for (std::size_t j = 0; j < n; ++j) dbp[j] += aip * gi[j];
        }
    }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(const double* a, double c, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * c;
}

void axpy(const double* a, double c, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * c;
}

void tanh_forward(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
}

void sigmoid_forward(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

}  // namespace mma::kernels::serial
