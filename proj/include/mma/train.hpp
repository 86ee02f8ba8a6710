#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mma/network.hpp"
#include "mma/signal.hpp"

namespace mma::net {

enum class TrainMode {
    joint,
    head1_only,
    head2_only,
    pretrain1_finetune2,
    pretrain2_finetune1,
    independent,
};

TrainMode train_mode_from_string(const std::string& text);
const std::string& train_mode_name(TrainMode mode);

struct TrainSchedule {
    int epochs = 100;
    int batch_size = 16;
    std::uint64_t seed = 1;
    int patience = 20;  // early-stopping epochs without val-loss improvement
    double lr = 1e-3;
};

struct EpochStats {
    int epoch = 0;          // global, 1-based
    std::string phase;      // loss phase driving this epoch
    double train_loss = 0;  // mean per-slice phase loss over the epoch
    double val_loss = 0;
    double train_acc = 0;
    double val_acc = 0;
    double best_val = 0;    // running minimum val loss
};

struct TrainResult {
    ParamStore params;  // best-val-loss parameters
    std::vector<EpochStats> history;
};

// Minimizes the mode's loss over slices with per-epoch shuffling, minibatch
// gradient accumulation (mean over the batch) and early stopping on val loss.
// `independent` trains two separate networks and returns them under net1. /
// net2. prefixes. Deterministic under schedule.seed. Throws NumericalError
// with epoch/batch context if the loss goes non-finite. A non-null `init`
// warm-starts from those values instead of fresh initialization (independent
// mode expects the net1./net2. layout) and rejects name/shape mismatches.
TrainResult train(const data::SliceBatch& train_slices,
                  const data::SliceBatch& val_slices, const ModelConfig& cfg,
                  TrainMode mode, const TrainSchedule& schedule,
                  const ParamStore* init = nullptr);

struct Evaluation {
    double joint_loss = 0;
    double slice_accuracy = 0;
    double point_f1 = 0;  // threshold 0.5 over unmasked points
};

// Infer-mode sweep over a batch with the joint loss.
Evaluation evaluate(const data::SliceBatch& batch, ParamStore& params,
                    const ModelConfig& cfg);

}  // namespace mma::net
