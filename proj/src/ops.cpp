#include "mma/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mma/error.hpp"
#include "mma/kernels.hpp"

namespace mma::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                             shape_str(t.shape()));
    }
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
    if (k != k2) {
        throw DimensionError("matmul: inner dimensions disagree " +
                             shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = tape.alloc({m, n}, rg);
    kernels::matmul(a.data(), b.data(), out.data(),
                    static_cast<std::size_t>(m), static_cast<std::size_t>(k),
                    static_cast<std::size_t>(n));
    if (rg) {
        tape.record([a, b, out, m, k, n]() {
            if (a.requires_grad()) {
                kernels::matmul_grad_a(out.grad().data(), b.data(), a.grad().data(),
                                       static_cast<std::size_t>(m),
                                       static_cast<std::size_t>(k),
                                       static_cast<std::size_t>(n));
            }
            if (b.requires_grad()) {
                kernels::matmul_grad_b(a.data(), out.grad().data(), b.grad().data(),
                                       static_cast<std::size_t>(m),
                                       static_cast<std::size_t>(k),
                                       static_cast<std::size_t>(n));
            }
        });
    }
    return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
    require_rank2(a, "transpose");
    const int m = a.dim(0), n = a.dim(1);
    Tensor out = tape.alloc({n, m}, a.requires_grad());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out.value()[static_cast<std::size_t>(j) * m + i] =
                a.value()[static_cast<std::size_t>(i) * n + j];
    if (a.requires_grad()) {
        tape.record([a, out, m, n]() {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    a.grad()[static_cast<std::size_t>(i) * n + j] +=
                        out.grad()[static_cast<std::size_t>(j) * m + i];
        });
    }
    return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = tape.alloc(a.shape(), rg);
    kernels::add(a.data(), b.data(), out.data(), out.size());
    if (rg) {
        tape.record([a, b, out]() {
            if (a.requires_grad())
                kernels::axpy(out.grad().data(), 1.0, a.grad().data(), out.size());
            if (b.requires_grad())
                kernels::axpy(out.grad().data(), 1.0, b.grad().data(), out.size());
        });
    }
    return out;
}

Tensor add_rowvec(Tape& tape, const Tensor& a, const Tensor& v) {
    require_rank2(a, "add_rowvec");
    const int m = a.dim(0), n = a.dim(1);
    if (v.rank() != 1 || v.dim(0) != n) {
        throw DimensionError("add_rowvec: vector " + shape_str(v.shape()) +
                             " does not match row width of " + shape_str(a.shape()));
    }
    const bool rg = a.requires_grad() || v.requires_grad();
    Tensor out = tape.alloc({m, n}, rg);
    for (int i = 0; i < m; ++i) {
        kernels::add(a.data() + static_cast<std::size_t>(i) * n, v.data(),
                     out.data() + static_cast<std::size_t>(i) * n,
                     static_cast<std::size_t>(n));
    }
    if (rg) {
        tape.record([a, v, out, m, n]() {
            if (a.requires_grad())
                kernels::axpy(out.grad().data(), 1.0, a.grad().data(), out.size());
            if (v.requires_grad()) {
                for (int i = 0; i < m; ++i)
                    kernels::serial::axpy(out.grad().data() + static_cast<std::size_t>(i) * n,
                                          1.0, v.grad().data(),
                                          static_cast<std::size_t>(n));
            }
        });
    }
    return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = tape.alloc(a.shape(), rg);
    kernels::mul(a.data(), b.data(), out.data(), out.size());
    if (rg) {
        tape.record([a, b, out]() {
            const std::size_t n = out.size();
            if (a.requires_grad())
                for (std::size_t i = 0; i < n; ++i)
                    a.grad()[i] += out.grad()[i] * b.value()[i];
            if (b.requires_grad())
                for (std::size_t i = 0; i < n; ++i)
                    b.grad()[i] += out.grad()[i] * a.value()[i];
        });
    }
    return out;
}

Tensor scale(Tape& tape, const Tensor& a, double c) {
    Tensor out = tape.alloc(a.shape(), a.requires_grad());
    kernels::scale(a.data(), c, out.data(), out.size());
    if (a.requires_grad()) {
        tape.record([a, out, c]() {
            kernels::axpy(out.grad().data(), c, a.grad().data(), out.size());
        });
    }
    return out;
}

Tensor add_scaled(Tape& tape, const Tensor& a, double wa, const Tensor& b, double wb) {
    require_same_shape(a, b, "add_scaled");
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = tape.alloc(a.shape(), rg);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.value()[i] = wa * a.value()[i] + wb * b.value()[i];
    if (rg) {
        tape.record([a, b, out, wa, wb]() {
            if (a.requires_grad())
                kernels::axpy(out.grad().data(), wa, a.grad().data(), out.size());
            if (b.requires_grad())
                kernels::axpy(out.grad().data(), wb, b.grad().data(), out.size());
        });
    }
    return out;
}

Tensor tanh(Tape& tape, const Tensor& a) {
    Tensor out = tape.alloc(a.shape(), a.requires_grad());
    kernels::tanh_forward(a.data(), out.data(), out.size());
    if (a.requires_grad()) {
        tape.record([a, out]() {
            const std::size_t n = out.size();
            for (std::size_t i = 0; i < n; ++i) {
                const double y = out.value()[i];
                a.grad()[i] += out.grad()[i] * (1.0 - y * y);
            }
        });
    }
    return out;
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
    Tensor out = tape.alloc(a.shape(), a.requires_grad());
    kernels::sigmoid_forward(a.data(), out.data(), out.size());
    if (a.requires_grad()) {
        tape.record([a, out]() {
            const std::size_t n = out.size();
            for (std::size_t i = 0; i < n; ++i) {
                const double y = out.value()[i];
                a.grad()[i] += out.grad()[i] * y * (1.0 - y);
            }
        });
    }
    return out;
}

Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, int axis) {
    if (a.rank() == 1 && b.rank() == 1) {
        if (axis != 0) throw DimensionError("concat: rank-1 tensors concat on axis 0");
        const int n1 = a.dim(0), n2 = b.dim(0);
        Tensor out = tape.alloc({n1 + n2}, a.requires_grad() || b.requires_grad());
        std::copy(a.value().begin(), a.value().end(), out.value().begin());
        std::copy(b.value().begin(), b.value().end(), out.value().begin() + n1);
        if (out.requires_grad()) {
            tape.record([a, b, out, n1, n2]() {
                if (a.requires_grad())
                    for (int i = 0; i < n1; ++i) a.grad()[i] += out.grad()[i];
                if (b.requires_grad())
                    for (int i = 0; i < n2; ++i) b.grad()[i] += out.grad()[n1 + i];
            });
        }
        return out;
    }
    require_rank2(a, "concat");
    require_rank2(b, "concat");
    if (axis == 0) {
        if (a.dim(1) != b.dim(1))
            throw DimensionError("concat axis 0: column counts differ " +
                                 shape_str(a.shape()) + " vs " + shape_str(b.shape()));
        const int m1 = a.dim(0), m2 = b.dim(0), n = a.dim(1);
        Tensor out = tape.alloc({m1 + m2, n}, a.requires_grad() || b.requires_grad());
        std::copy(a.value().begin(), a.value().end(), out.value().begin());
        std::copy(b.value().begin(), b.value().end(),
                  out.value().begin() + static_cast<std::ptrdiff_t>(a.size()));
        if (out.requires_grad()) {
            tape.record([a, b, out]() {
                if (a.requires_grad())
                    kernels::serial::axpy(out.grad().data(), 1.0, a.grad().data(), a.size());
                if (b.requires_grad())
                    kernels::serial::axpy(out.grad().data() + a.size(), 1.0,
                                          b.grad().data(), b.size());
            });
        }
        return out;
    }
    if (axis != 1) throw DimensionError("concat: axis must be 0 or 1");
    if (a.dim(0) != b.dim(0))
        throw DimensionError("concat axis 1: row counts differ " +
                             shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const int m = a.dim(0), p = a.dim(1), q = b.dim(1);
    Tensor out = tape.alloc({m, p + q}, a.requires_grad() || b.requires_grad());
    for (int i = 0; i < m; ++i) {
        std::copy_n(a.data() + static_cast<std::size_t>(i) * p, p,
                    out.data() + static_cast<std::size_t>(i) * (p + q));
        std::copy_n(b.data() + static_cast<std::size_t>(i) * q, q,
                    out.data() + static_cast<std::size_t>(i) * (p + q) + p);
    }
    if (out.requires_grad()) {
        tape.record([a, b, out, m, p, q]() {
            for (int i = 0; i < m; ++i) {
                const double* g = out.grad().data() + static_cast<std::size_t>(i) * (p + q);
                if (a.requires_grad())
                    kernels::serial::axpy(g, 1.0,
                                          a.grad().data() + static_cast<std::size_t>(i) * p,
                                          static_cast<std::size_t>(p));
                if (b.requires_grad())
                    kernels::serial::axpy(g + p, 1.0,
                                          b.grad().data() + static_cast<std::size_t>(i) * q,
                                          static_cast<std::size_t>(q));
            }
        });
    }
    return out;
}

Tensor reshape(Tape& tape, const Tensor& a, std::vector<int> shape) {
    if (shape_size(shape) != a.size()) {
        throw DimensionError("reshape: cannot view " + shape_str(a.shape()) +
                             " as " + shape_str(shape));
    }
    Tensor out = tape.alloc(std::move(shape), a.requires_grad());
    std::copy(a.value().begin(), a.value().end(), out.value().begin());
    if (a.requires_grad()) {
        tape.record([a, out]() {
            kernels::serial::axpy(out.grad().data(), 1.0, a.grad().data(), a.size());
        });
    }
    return out;
}

Tensor slice_rows(Tape& tape, const Tensor& a, int row0, int row1) {
    require_rank2(a, "slice_rows");
    if (row0 < 0 || row1 > a.dim(0) || row0 >= row1) {
        throw DimensionError("slice_rows: bad range [" + std::to_string(row0) + ", " +
                             std::to_string(row1) + ") for " + shape_str(a.shape()));
    }
    const int n = a.dim(1), rows = row1 - row0;
    Tensor out = tape.alloc({rows, n}, a.requires_grad());
    std::copy_n(a.data() + static_cast<std::size_t>(row0) * n,
                static_cast<std::size_t>(rows) * n, out.data());
    if (a.requires_grad()) {
        tape.record([a, out, row0, rows, n]() {
            kernels::serial::axpy(out.grad().data(), 1.0,
                                  a.grad().data() + static_cast<std::size_t>(row0) * n,
                                  static_cast<std::size_t>(rows) * n);
        });
    }
    return out;
}

Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows) {
    if (rows.empty()) throw DimensionError("stack_rows: no rows");
    const int d = rows[0].dim(0);
    bool rg = false;
    for (const Tensor& r : rows) {
        if (r.rank() != 1 || r.dim(0) != d)
            throw DimensionError("stack_rows: rows must all be rank-1 of equal length");
        rg = rg || r.requires_grad();
    }
    const int m = static_cast<int>(rows.size());
    Tensor out = tape.alloc({m, d}, rg);
    for (int i = 0; i < m; ++i)
        std::copy(rows[static_cast<std::size_t>(i)].value().begin(),
                  rows[static_cast<std::size_t>(i)].value().end(),
                  out.data() + static_cast<std::size_t>(i) * d);
    if (rg) {
        tape.record([rows, out, d]() {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!rows[i].requires_grad()) continue;
                kernels::serial::axpy(out.grad().data() + i * static_cast<std::size_t>(d),
                                      1.0, rows[i].grad().data(),
                                      static_cast<std::size_t>(d));
            }
        });
    }
    return out;
}

Tensor tile_rows(Tape& tape, const Tensor& v, int m) {
    if (v.rank() != 1) throw DimensionError("tile_rows: expected rank-1, got " + shape_str(v.shape()));
    const int d = v.dim(0);
    Tensor out = tape.alloc({m, d}, v.requires_grad());
    for (int i = 0; i < m; ++i)
        std::copy(v.value().begin(), v.value().end(),
                  out.data() + static_cast<std::size_t>(i) * d);
    if (v.requires_grad()) {
        tape.record([v, out, m, d]() {
            for (int i = 0; i < m; ++i)
                kernels::serial::axpy(out.grad().data() + static_cast<std::size_t>(i) * d,
                                      1.0, v.grad().data(), static_cast<std::size_t>(d));
        });
    }
    return out;
}

Tensor sum(Tape& tape, const Tensor& a) {
    Tensor out = tape.alloc({1}, a.requires_grad());
    double acc = 0.0;
    for (double x : a.value()) acc += x;
    out.value()[0] = acc;
    if (a.requires_grad()) {
        tape.record([a, out]() {
            const double g = out.grad()[0];
            for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += g;
        });
    }
    return out;
}

Tensor softmax(Tape& tape, const Tensor& x, const std::vector<bool>* mask) {
    const std::size_t n = x.size();
    if (n == 0) throw DegenerateInputError("softmax: empty input");
    if (mask && mask->size() != n) {
        throw DimensionError("softmax: mask length " + std::to_string(mask->size()) +
                             " does not match input size " + std::to_string(n));
    }
    double max_val = -std::numeric_limits<double>::infinity();
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask && !(*mask)[i]) continue;
        ++active;
        max_val = std::max(max_val, x.value()[i]);
    }
    if (active == 0) throw DegenerateInputError("softmax: all entries masked");

    Tensor out = tape.alloc(x.shape(), x.requires_grad());
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask && !(*mask)[i]) {
            out.value()[i] = 0.0;
            continue;
        }
        const double e = std::exp(x.value()[i] - max_val);
        out.value()[i] = e;
        denom += e;
    }
    for (std::size_t i = 0; i < n; ++i) out.value()[i] /= denom;

    if (x.requires_grad()) {
        std::vector<bool> mask_copy = mask ? *mask : std::vector<bool>();
        tape.record([x, out, mask_copy, n]() {
            // dx_i = y_i * (g_i - sum_j g_j y_j) over unmasked entries
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += out.grad()[i] * out.value()[i];
            for (std::size_t i = 0; i < n; ++i) {
                if (!mask_copy.empty() && !mask_copy[i]) continue;
                x.grad()[i] += out.value()[i] * (out.grad()[i] - dot);
            }
        });
    }
    return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training, RngStream& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ContractError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    }
    if (!training || rate == 0.0) {
        Tensor out = tape.alloc(x.shape(), x.requires_grad());
        std::copy(x.value().begin(), x.value().end(), out.value().begin());
        if (x.requires_grad()) {
            tape.record([x, out]() {
                kernels::axpy(out.grad().data(), 1.0, x.grad().data(), x.size());
            });
        }
        return out;
    }
    const std::size_t n = x.size();
    const double keep_scale = 1.0 / (1.0 - rate);
    auto mask = std::make_shared<std::vector<double>>(n);
    for (std::size_t i = 0; i < n; ++i)
        (*mask)[i] = (rng.uniform() >= rate) ? keep_scale : 0.0;
    Tensor out = tape.alloc(x.shape(), x.requires_grad());
    kernels::mul(x.data(), mask->data(), out.data(), n);
    if (x.requires_grad()) {
        tape.record([x, out, mask]() {
            const std::size_t len = out.size();
            for (std::size_t i = 0; i < len; ++i)
                x.grad()[i] += out.grad()[i] * (*mask)[i];
        });
    }
    return out;
}

Tensor categorical_cross_entropy(Tape& tape, const Tensor& probs, int target) {
    const std::size_t n = probs.size();
    if (target < 0 || static_cast<std::size_t>(target) >= n) {
        throw LabelError("cross_entropy: target " + std::to_string(target) +
                         " outside [0, " + std::to_string(n) + ")");
    }
    const double p = probs.value()[static_cast<std::size_t>(target)];
    const double clamped = std::max(p, kCrossEntropyEps);
    Tensor out = tape.alloc({1}, probs.requires_grad());
    out.value()[0] = -std::log(clamped);
    if (probs.requires_grad()) {
        tape.record([probs, out, target, p, clamped]() {
            if (p >= kCrossEntropyEps) {
                probs.grad()[static_cast<std::size_t>(target)] +=
                    out.grad()[0] * (-1.0 / clamped);
            }
        });
    }
    return out;
}

Tensor masked_mean_bce(Tape& tape, const Tensor& probs,
                       const std::vector<double>& targets,
                       const std::vector<bool>& mask) {
    const std::size_t n = probs.size();
    if (targets.size() != n || mask.size() != n) {
        throw DimensionError("masked_mean_bce: probs/targets/mask sizes disagree");
    }
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i) active += mask[i] ? 1 : 0;
    if (active == 0) throw DegenerateInputError("masked_mean_bce: zero unmasked points");

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        const double z = probs.value()[i];
        const double t = targets[i];
        acc -= t * std::log(std::max(z, kCrossEntropyEps)) +
               (1.0 - t) * std::log(std::max(1.0 - z, kCrossEntropyEps));
    }
    Tensor out = tape.alloc({1}, probs.requires_grad());
    out.value()[0] = acc / static_cast<double>(active);
    if (probs.requires_grad()) {
        tape.record([probs, out, targets, mask, active]() {
            const double g = out.grad()[0] / static_cast<double>(active);
            for (std::size_t i = 0; i < probs.size(); ++i) {
                if (!mask[i]) continue;
                const double z = probs.value()[i];
                const double t = targets[i];
                double d = 0.0;
                if (z >= kCrossEntropyEps) d -= t / std::max(z, kCrossEntropyEps);
                if (1.0 - z >= kCrossEntropyEps)
                    d += (1.0 - t) / std::max(1.0 - z, kCrossEntropyEps);
                probs.grad()[i] += g * d;
            }
        });
    }
    return out;
}

}  // namespace mma::ops
