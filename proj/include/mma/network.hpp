#pragma once

#include <string>
#include <vector>

#include "mma/bilstm.hpp"
#include "mma/init.hpp"
#include "mma/param_store.hpp"
#include "mma/rng.hpp"
#include "mma/tensor.hpp"

namespace mma::net {

struct ModelConfig {
    int d_proj = 64;     // 0 disables the projection (raw scalar pass-through)
    int d_hidden = 128;
    int beat_len = 150;  // T
    int l_slice = 1500;  // M = l_slice / beat_len beats
    int n_classes = 3;
    double dropout_rate = 0.5;
    double w_d = 1.0;
    double w_l = 40.0;
    bool concat_slice_features_to_head2 = false;
    InitScheme init_scheme = InitScheme::glorot;

    int beats() const { return l_slice / beat_len; }
    // attention score dimension: feature width of the pooled vectors
    int attn_dim() const { return 2 * d_hidden; }
    void validate() const;
};

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const std::string& text);

// Builds every trainable tensor with the exact shapes the model needs.
// Weight matrices are stored [out x in].
ParamStore build_params(const ModelConfig& cfg, RngStream& rng);
ParamStore build_zero_params(const ModelConfig& cfg);

// Per-point affine lift of the scalar samples, [L x 1] -> [L x d_proj];
// identity pass-through when the projection is disabled (d_proj = 0).
Tensor project_points(Tape& tape, const Tensor& x, ParamStore& params,
                      const ModelConfig& cfg);

struct AttentionPool {
    Tensor pooled;   // [d]
    Tensor weights;  // [n], masked entries exactly 0
};

// Learned-query attention: scores = tanh(h W^T + b) q, weights =
// masked softmax(scores), pooled = weights . h.
AttentionPool attention_pool(Tape& tape, const Tensor& h, const Tensor& w,
                             const Tensor& b, const Tensor& q,
                             const std::vector<bool>* mask = nullptr);

enum class RunMode { train, infer };

struct ForwardOutput {
    Tensor slice_probs;      // [n_classes]
    Tensor point_probs;      // [l_slice]; masked positions reported but invalid
    Tensor beat_attention;   // [M x T]; all-masked beats give zero rows
    Tensor slice_attention;  // [M]
    Tensor slice_vector;     // [2H]
    std::vector<bool> beat_valid;  // beat has >= 1 unmasked point
};

// One normalized slice through the whole pipeline: projection, point-level
// recurrence, beat attention pooling, beat-level recurrence, slice attention
// pooling, both heads. Padded positions are zeroed on entry so masked samples
// cannot leak into any output.
ForwardOutput forward(Tape& tape, const std::vector<double>& slice,
                      const std::vector<bool>& mask, ParamStore& params,
                      const ModelConfig& cfg, RunMode mode, RngStream& rng);

// w_d * cross-entropy(slice) + w_l * mean over unmasked points of BCE.
Tensor joint_loss(Tape& tape, const ForwardOutput& out, int slice_label,
                  const std::vector<double>& point_labels,
                  const std::vector<bool>& mask, const ModelConfig& cfg);

}  // namespace mma::net
