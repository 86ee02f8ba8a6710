#include "mma/bilstm.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "mma/error.hpp"
#include "mma/kernels.hpp"

namespace mma::net {

namespace {

// Forward activations of one direction, kept for the backward pass.
// Row indices are in direction order (step 0 = first step processed).
struct DirectionTrace {
    std::vector<double> gates;   // [n x 4H], post-activation
    std::vector<double> c;       // [n x H]
    std::vector<double> tanh_c;  // [n x H]
    std::vector<double> h;       // [n x H]
};

void check_cell(const LstmCellParams& p, int d_in, const char* which) {
    if (p.w_x.rank() != 2 || p.w_h.rank() != 2 || p.b.rank() != 1) {
        throw DimensionError(std::string("bilstm: malformed ") + which + " cell params");
    }
    const int four_h = p.w_x.dim(0);
    const int h = p.w_h.dim(1);
    if (four_h != 4 * h || p.w_h.dim(0) != four_h || p.b.dim(0) != four_h ||
        p.w_x.dim(1) != d_in) {
        throw DimensionError(std::string("bilstm: inconsistent ") + which +
                             " cell shapes w_x=" + shape_str(p.w_x.shape()) +
                             " w_h=" + shape_str(p.w_h.shape()) +
                             " b=" + shape_str(p.b.shape()));
    }
}

// Runs one direction; `order[k]` maps step k to the absolute sequence row.
DirectionTrace run_direction(const Tensor& seq, const LstmCellParams& p,
                             const std::vector<int>& order, int hidden) {
    const int n = static_cast<int>(order.size());
    const int d_in = seq.dim(1);
    const int g4 = 4 * hidden;

    DirectionTrace trace;
    trace.gates.assign(static_cast<std::size_t>(n) * g4, 0.0);
    trace.c.assign(static_cast<std::size_t>(n) * hidden, 0.0);
    trace.tanh_c.assign(static_cast<std::size_t>(n) * hidden, 0.0);
    trace.h.assign(static_cast<std::size_t>(n) * hidden, 0.0);

    // Bulk input contribution for all steps: A[k] = w_x * x_order[k]
    std::vector<double> x_ordered(static_cast<std::size_t>(n) * d_in);
    for (int k = 0; k < n; ++k) {
        const double* src = seq.data() + static_cast<std::size_t>(order[static_cast<std::size_t>(k)]) * d_in;
        std::copy_n(src, d_in, x_ordered.data() + static_cast<std::size_t>(k) * d_in);
    }
    std::vector<double> wxT(static_cast<std::size_t>(d_in) * g4);
    for (int r = 0; r < g4; ++r)
        for (int cidx = 0; cidx < d_in; ++cidx)
            wxT[static_cast<std::size_t>(cidx) * g4 + r] =
                p.w_x.value()[static_cast<std::size_t>(r) * d_in + cidx];
    std::vector<double> a_bulk(static_cast<std::size_t>(n) * g4);
    kernels::matmul(x_ordered.data(), wxT.data(), a_bulk.data(),
                    static_cast<std::size_t>(n), static_cast<std::size_t>(d_in),
                    static_cast<std::size_t>(g4));

    std::vector<double> h_prev(static_cast<std::size_t>(hidden), 0.0);
    std::vector<double> c_prev(static_cast<std::size_t>(hidden), 0.0);
    std::vector<double> a_step(static_cast<std::size_t>(g4));
    std::vector<double> wh_h(static_cast<std::size_t>(g4));

    for (int k = 0; k < n; ++k) {
        kernels::matmul(p.w_h.value().data(), h_prev.data(), wh_h.data(),
                        static_cast<std::size_t>(g4), static_cast<std::size_t>(hidden), 1);
        const double* a_row = a_bulk.data() + static_cast<std::size_t>(k) * g4;
        for (int r = 0; r < g4; ++r)
            a_step[static_cast<std::size_t>(r)] =
                a_row[r] + wh_h[static_cast<std::size_t>(r)] + p.b.value()[static_cast<std::size_t>(r)];

        double* gates = trace.gates.data() + static_cast<std::size_t>(k) * g4;
        double* c_row = trace.c.data() + static_cast<std::size_t>(k) * hidden;
        double* tc_row = trace.tanh_c.data() + static_cast<std::size_t>(k) * hidden;
        double* h_row = trace.h.data() + static_cast<std::size_t>(k) * hidden;
        for (int j = 0; j < hidden; ++j) {
            const double ai = a_step[static_cast<std::size_t>(j)];
            const double af = a_step[static_cast<std::size_t>(hidden + j)];
            const double ag = a_step[static_cast<std::size_t>(2 * hidden + j)];
            const double ao = a_step[static_cast<std::size_t>(3 * hidden + j)];
            const double gi = 1.0 / (1.0 + std::exp(-ai));
            const double gf = 1.0 / (1.0 + std::exp(-af));
            const double gg = std::tanh(ag);
            const double go = 1.0 / (1.0 + std::exp(-ao));
            gates[j] = gi;
            gates[hidden + j] = gf;
            gates[2 * hidden + j] = gg;
            gates[3 * hidden + j] = go;
            const double c_new = gf * c_prev[static_cast<std::size_t>(j)] + gi * gg;
            c_row[j] = c_new;
            const double tc = std::tanh(c_new);
            tc_row[j] = tc;
            h_row[j] = go * tc;
        }
        std::copy_n(c_row, hidden, c_prev.data());
        std::copy_n(h_row, hidden, h_prev.data());
    }
    return trace;
}

// Backpropagation through one direction. d_out_dir[k x H] is the gradient of
// the loss w.r.t. this direction's hidden state at step k (direction order).
void backprop_direction(const Tensor& seq, const LstmCellParams& p,
                        const std::vector<int>& order, int hidden,
                        const DirectionTrace& trace,
                        const std::vector<double>& d_out_dir) {
    const int n = static_cast<int>(order.size());
    const int d_in = seq.dim(1);
    const int g4 = 4 * hidden;

    std::vector<double> whT(static_cast<std::size_t>(hidden) * g4);
    for (int r = 0; r < g4; ++r)
        for (int cidx = 0; cidx < hidden; ++cidx)
            whT[static_cast<std::size_t>(cidx) * g4 + r] =
                p.w_h.value()[static_cast<std::size_t>(r) * hidden + cidx];

    std::vector<double> d_gates_all(static_cast<std::size_t>(n) * g4, 0.0);
    std::vector<double> dh_rec(static_cast<std::size_t>(hidden), 0.0);
    std::vector<double> dc_rec(static_cast<std::size_t>(hidden), 0.0);
    std::vector<double> da(static_cast<std::size_t>(g4));

    for (int k = n - 1; k >= 0; --k) {
        const double* gates = trace.gates.data() + static_cast<std::size_t>(k) * g4;
        const double* tc_row = trace.tanh_c.data() + static_cast<std::size_t>(k) * hidden;
        const double* c_prev = k > 0 ? trace.c.data() + static_cast<std::size_t>(k - 1) * hidden : nullptr;
        double* da_row = d_gates_all.data() + static_cast<std::size_t>(k) * g4;

        for (int j = 0; j < hidden; ++j) {
            const double gi = gates[j];
            const double gf = gates[hidden + j];
            const double gg = gates[2 * hidden + j];
            const double go = gates[3 * hidden + j];
            const double tc = tc_row[j];
            const double dh = d_out_dir[static_cast<std::size_t>(k) * hidden + j] +
                              dh_rec[static_cast<std::size_t>(j)];
            const double d_o = dh * tc;
            const double dc = dh * go * (1.0 - tc * tc) + dc_rec[static_cast<std::size_t>(j)];
            const double d_i = dc * gg;
            const double d_g = dc * gi;
            const double cp = c_prev ? c_prev[j] : 0.0;
            const double d_f = dc * cp;
            dc_rec[static_cast<std::size_t>(j)] = dc * gf;
            da[static_cast<std::size_t>(j)] = d_i * gi * (1.0 - gi);
            da[static_cast<std::size_t>(hidden + j)] = d_f * gf * (1.0 - gf);
            da[static_cast<std::size_t>(2 * hidden + j)] = d_g * (1.0 - gg * gg);
            da[static_cast<std::size_t>(3 * hidden + j)] = d_o * go * (1.0 - go);
        }
        std::copy_n(da.data(), g4, da_row);
        // dh_{k-1} contribution through the recurrence: w_h^T * da
        kernels::matmul(whT.data(), da.data(), dh_rec.data(),
                        static_cast<std::size_t>(hidden), static_cast<std::size_t>(g4), 1);
    }

    // Weight gradients from the whole unrolled pass.
    // h_prev_rows[k] = h at step k-1 in direction order (zeros for k = 0).
    std::vector<double> h_prev_rows(static_cast<std::size_t>(n) * hidden, 0.0);
    if (n > 1)
        std::copy_n(trace.h.data(), static_cast<std::size_t>(n - 1) * hidden,
                    h_prev_rows.data() + hidden);
    std::vector<double> x_ordered(static_cast<std::size_t>(n) * d_in);
    for (int k = 0; k < n; ++k)
        std::copy_n(seq.data() + static_cast<std::size_t>(order[static_cast<std::size_t>(k)]) * d_in,
                    d_in, x_ordered.data() + static_cast<std::size_t>(k) * d_in);

    if (p.w_x.requires_grad())
        kernels::matmul_grad_b(d_gates_all.data(), x_ordered.data(), p.w_x.grad().data(),
                               static_cast<std::size_t>(n), static_cast<std::size_t>(g4),
                               static_cast<std::size_t>(d_in));
    if (p.w_h.requires_grad())
        kernels::matmul_grad_b(d_gates_all.data(), h_prev_rows.data(), p.w_h.grad().data(),
                               static_cast<std::size_t>(n), static_cast<std::size_t>(g4),
                               static_cast<std::size_t>(hidden));
    if (p.b.requires_grad()) {
        for (int k = 0; k < n; ++k)
            kernels::serial::axpy(d_gates_all.data() + static_cast<std::size_t>(k) * g4, 1.0,
                                  p.b.grad().data(), static_cast<std::size_t>(g4));
    }
    if (seq.requires_grad()) {
        std::vector<double> dx_ordered(static_cast<std::size_t>(n) * d_in);
        kernels::matmul(d_gates_all.data(), p.w_x.value().data(), dx_ordered.data(),
                        static_cast<std::size_t>(n), static_cast<std::size_t>(g4),
                        static_cast<std::size_t>(d_in));
        for (int k = 0; k < n; ++k)
            kernels::serial::axpy(dx_ordered.data() + static_cast<std::size_t>(k) * d_in, 1.0,
                                  seq.grad().data() +
                                      static_cast<std::size_t>(order[static_cast<std::size_t>(k)]) * d_in,
                                  static_cast<std::size_t>(d_in));
    }
}

}  // namespace

Tensor bilstm(Tape& tape, const Tensor& seq, const BiLstmParams& params) {
    if (seq.rank() != 2) throw DimensionError("bilstm: expected [n x d] input, got " + shape_str(seq.shape()));
    const int n = seq.dim(0);
    const int d_in = seq.dim(1);
    if (n < 1) throw DimensionError("bilstm: empty sequence");
    check_cell(params.fwd, d_in, "forward");
    check_cell(params.bwd, d_in, "backward");
    if (params.fwd.w_h.dim(1) != params.bwd.w_h.dim(1)) {
        throw DimensionError("bilstm: directions disagree on hidden size");
    }
    const int hidden = params.fwd.w_h.dim(1);

    std::vector<int> fwd_order(static_cast<std::size_t>(n));
    std::vector<int> bwd_order(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        fwd_order[static_cast<std::size_t>(t)] = t;
        bwd_order[static_cast<std::size_t>(t)] = n - 1 - t;
    }

    auto fwd_trace = std::make_shared<DirectionTrace>(
        run_direction(seq, params.fwd, fwd_order, hidden));
    auto bwd_trace = std::make_shared<DirectionTrace>(
        run_direction(seq, params.bwd, bwd_order, hidden));

    const bool rg = seq.requires_grad() || params.fwd.w_x.requires_grad() ||
                    params.fwd.w_h.requires_grad() || params.fwd.b.requires_grad() ||
                    params.bwd.w_x.requires_grad() || params.bwd.w_h.requires_grad() ||
                    params.bwd.b.requires_grad();
    Tensor out = tape.alloc({n, 2 * hidden}, rg);
    for (int t = 0; t < n; ++t) {
        double* row = out.data() + static_cast<std::size_t>(t) * 2 * hidden;
        std::copy_n(fwd_trace->h.data() + static_cast<std::size_t>(t) * hidden, hidden, row);
        // backward direction processed position t at step n-1-t
        std::copy_n(bwd_trace->h.data() + static_cast<std::size_t>(n - 1 - t) * hidden,
                    hidden, row + hidden);
    }

    if (rg) {
        BiLstmParams p = params;
        tape.record([seq, p, out, fwd_trace, bwd_trace, fwd_order, bwd_order,
                     hidden, n]() {
            std::vector<double> d_fwd(static_cast<std::size_t>(n) * hidden);
            std::vector<double> d_bwd(static_cast<std::size_t>(n) * hidden);
            for (int t = 0; t < n; ++t) {
                const double* g = out.grad().data() + static_cast<std::size_t>(t) * 2 * hidden;
                std::copy_n(g, hidden, d_fwd.data() + static_cast<std::size_t>(t) * hidden);
                std::copy_n(g + hidden, hidden,
                            d_bwd.data() + static_cast<std::size_t>(n - 1 - t) * hidden);
            }
            backprop_direction(seq, p.fwd, fwd_order, hidden, *fwd_trace, d_fwd);
            backprop_direction(seq, p.bwd, bwd_order, hidden, *bwd_trace, d_bwd);
        });
    }
    return out;
}

}  // namespace mma::net
