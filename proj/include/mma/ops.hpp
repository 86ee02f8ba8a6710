#pragma once

#include <vector>

#include "mma/rng.hpp"
#include "mma/tensor.hpp"

namespace mma::ops {

// Every op computes its value eagerly and, when an input requires grad,
// records the matching accumulation rule on the tape.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor transpose(Tape& tape, const Tensor& a);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
// a is [m x n], v is [n]; v is added to every row.
Tensor add_rowvec(Tape& tape, const Tensor& a, const Tensor& v);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double c);
// wa*a + wb*b, elementwise over same-shape tensors.
Tensor add_scaled(Tape& tape, const Tensor& a, double wa, const Tensor& b, double wb);

Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);

// axis 0 stacks rows, axis 1 widens columns. Rank-1 tensors concat on axis 0.
Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, int axis);
Tensor reshape(Tape& tape, const Tensor& a, std::vector<int> shape);
// Copy of rows [row0, row1) of a rank-2 tensor.
Tensor slice_rows(Tape& tape, const Tensor& a, int row0, int row1);
// Stacks rank-1 tensors of equal length into [n x d].
Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows);
// Repeats a rank-1 tensor [d] as every row of [m x d].
Tensor tile_rows(Tape& tape, const Tensor& v, int m);

Tensor sum(Tape& tape, const Tensor& a);

// Numerically stable masked softmax over the flattened n entries.
// Masked entries are exactly 0 in the output; mask may be null for none.
Tensor softmax(Tape& tape, const Tensor& x, const std::vector<bool>* mask = nullptr);

// Inverted dropout: training zeroes entries with probability rate and scales
// survivors by 1/(1-rate); inference is the identity.
Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training, RngStream& rng);

inline constexpr double kCrossEntropyEps = 1e-12;

// -log(probs[target]) with the probability clamped at kCrossEntropyEps.
Tensor categorical_cross_entropy(Tape& tape, const Tensor& probs, int target);

// Mean over unmasked entries of the binary cross-entropy of probs vs targets.
Tensor masked_mean_bce(Tape& tape, const Tensor& probs,
                       const std::vector<double>& targets,
                       const std::vector<bool>& mask);

}  // namespace mma::ops
