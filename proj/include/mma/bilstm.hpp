#pragma once

#include "mma/tensor.hpp"

namespace mma::net {

// One LSTM direction's weights. Gate rows are packed [i; f; g; o] where
// i/f/o are sigmoid gates and g is the tanh candidate.
struct LstmCellParams {
    Tensor w_x;  // [4H x D_in]
    Tensor w_h;  // [4H x H]
    Tensor b;    // [4H]
};

struct BiLstmParams {
    LstmCellParams fwd;
    LstmCellParams bwd;
};

// Runs the cell left-to-right and right-to-left from zero initial states and
// concatenates per-position hidden states: out[t] = [h_fwd(t) || h_bwd(t)].
// seq is [n x D_in], output is [n x 2H]. Fused op: the whole truncated
// backpropagation-through-time pass is recorded as one tape rule.
Tensor bilstm(Tape& tape, const Tensor& seq, const BiLstmParams& params);

}  // namespace mma::net
