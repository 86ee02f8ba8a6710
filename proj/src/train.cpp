#include "mma/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mma/error.hpp"
#include "mma/log.hpp"
#include "mma/ops.hpp"
#include "mma/optimizer.hpp"

namespace mma::net {

TrainMode train_mode_from_string(const std::string& text) {
    if (text == "joint") return TrainMode::joint;
    if (text == "head1_only") return TrainMode::head1_only;
    if (text == "head2_only") return TrainMode::head2_only;
    if (text == "pretrain1_finetune2") return TrainMode::pretrain1_finetune2;
    if (text == "pretrain2_finetune1") return TrainMode::pretrain2_finetune1;
    if (text == "independent") return TrainMode::independent;
    throw ContractError("unknown training mode '" + text + "'");
}

const std::string& train_mode_name(TrainMode mode) {
    static const std::string names[] = {"joint",
                                        "head1_only",
                                        "head2_only",
                                        "pretrain1_finetune2",
                                        "pretrain2_finetune1",
                                        "independent"};
    return names[static_cast<int>(mode)];
}

namespace {

enum class PhaseLoss { joint, d_only, l_only };

const char* phase_name(PhaseLoss p) {
    switch (p) {
        case PhaseLoss::joint: return "joint";
        case PhaseLoss::d_only: return "head1";
        case PhaseLoss::l_only: return "head2";
    }
    return "?";
}

struct Phase {
    PhaseLoss loss;
    int epochs;
};

std::vector<Phase> plan_phases(TrainMode mode, int epochs) {
    switch (mode) {
        case TrainMode::joint: return {{PhaseLoss::joint, epochs}};
        case TrainMode::head1_only: return {{PhaseLoss::d_only, epochs}};
        case TrainMode::head2_only: return {{PhaseLoss::l_only, epochs}};
        case TrainMode::pretrain1_finetune2:
            return {{PhaseLoss::d_only, (epochs + 1) / 2}, {PhaseLoss::l_only, epochs / 2}};
        case TrainMode::pretrain2_finetune1:
            return {{PhaseLoss::l_only, (epochs + 1) / 2}, {PhaseLoss::d_only, epochs / 2}};
        case TrainMode::independent:
            throw ContractError("independent mode is expanded by train(), not planned");
    }
    return {};
}

Tensor phase_loss(Tape& tape, PhaseLoss phase, const ForwardOutput& out, int label,
                  const std::vector<double>& point_labels, const std::vector<bool>& mask,
                  const ModelConfig& cfg) {
    switch (phase) {
        case PhaseLoss::joint:
            return joint_loss(tape, out, label, point_labels, mask, cfg);
        case PhaseLoss::d_only:
            return ops::scale(tape, ops::categorical_cross_entropy(tape, out.slice_probs, label),
                              cfg.w_d);
        case PhaseLoss::l_only:
            return ops::scale(tape, ops::masked_mean_bce(tape, out.point_probs, point_labels, mask),
                              cfg.w_l);
    }
    throw ContractError("unreachable phase");
}

int argmax3(const Tensor& probs) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.size()); ++c)
        if (probs.value()[static_cast<std::size_t>(c)] >
            probs.value()[static_cast<std::size_t>(best)])
            best = c;
    return best;
}

struct SliceInputs {
    std::vector<std::vector<double>> normalized;
};

SliceInputs prepare(const data::SliceBatch& batch) {
    SliceInputs in;
    in.normalized.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        in.normalized.push_back(data::normalize(batch.slices[i], batch.mask[i]));
    return in;
}

// Mean phase loss and slice accuracy over a batch in infer mode.
std::pair<double, double> eval_pass(const data::SliceBatch& batch, const SliceInputs& in,
                                    ParamStore& params, const ModelConfig& cfg,
                                    PhaseLoss phase) {
    RngStream unused(0);
    double total = 0;
    int hits = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Tape tape;
        ForwardOutput out = forward(tape, in.normalized[i], batch.mask[i], params, cfg,
                                    RunMode::infer, unused);
        total += phase_loss(tape, phase, out, batch.slice_labels[i], batch.point_labels[i],
                            batch.mask[i], cfg)
                     .item();
        hits += argmax3(out.slice_probs) == batch.slice_labels[i];
    }
    const auto n = static_cast<double>(batch.size());
    return {total / n, hits / n};
}

TrainResult train_single(const data::SliceBatch& train_slices,
                         const data::SliceBatch& val_slices, const ModelConfig& cfg,
                         TrainMode mode, const TrainSchedule& sched,
                         std::uint64_t seed_salt, const ParamStore* init) {
    if (train_slices.size() == 0 || val_slices.size() == 0)
        throw ContractError("train: empty slice batch");
    if (sched.batch_size < 1) throw ContractError("train: batch_size must be >= 1");
    if (sched.epochs < 0) throw ContractError("train: negative epochs");

    const SliceInputs train_in = prepare(train_slices);
    const SliceInputs val_in = prepare(val_slices);

    RngStream init_rng = RngStream::derive(sched.seed, 0x1717 + seed_salt);
    ParamStore params = build_params(cfg, init_rng);
    if (init != nullptr) params.load_values_from(*init);
    AdamOptimizer opt({sched.lr, 0.9, 0.999, 1e-8});
    RngStream dropout_rng = RngStream::derive(sched.seed, 0xD80 + seed_salt);

    TrainResult result;
    const std::vector<Phase> phases = plan_phases(mode, sched.epochs);
    int global_epoch = 0;

    for (const Phase& phase : phases) {
        ParamStore best = params.clone();
        double best_val = std::numeric_limits<double>::infinity();
        int stale = 0;

        for (int e = 0; e < phase.epochs; ++e) {
            ++global_epoch;
            std::vector<std::size_t> order(train_slices.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            RngStream shuffle =
                RngStream::derive(sched.seed, 0xE000 + seed_salt + static_cast<std::uint64_t>(global_epoch));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1],
                          order[static_cast<std::size_t>(shuffle.uniform_int(
                              0, static_cast<std::int64_t>(i) - 1))]);

            double epoch_loss = 0;
            int epoch_hits = 0;
            for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(sched.batch_size)) {
                const std::size_t b1 =
                    std::min(order.size(), b0 + static_cast<std::size_t>(sched.batch_size));
                const double inv = 1.0 / static_cast<double>(b1 - b0);
                for (std::size_t k = b0; k < b1; ++k) {
                    const std::size_t i = order[k];
                    Tape tape;
                    ForwardOutput out =
                        forward(tape, train_in.normalized[i], train_slices.mask[i], params,
                                cfg, RunMode::train, dropout_rng);
                    Tensor loss =
                        phase_loss(tape, phase.loss, out, train_slices.slice_labels[i],
                                   train_slices.point_labels[i], train_slices.mask[i], cfg);
                    const double value = loss.item();
                    if (!std::isfinite(value))
                        throw NumericalError("epoch " + std::to_string(global_epoch) +
                                             " batch " + std::to_string(b0 / sched.batch_size + 1) +
                                             ": non-finite training loss");
                    epoch_loss += value;
                    epoch_hits += argmax3(out.slice_probs) == train_slices.slice_labels[i];
                    Tensor scaled = ops::scale(tape, loss, inv);
                    tape.backward(scaled);
                }
                opt.step(params);
            }

            auto [val_loss, val_acc] = eval_pass(val_slices, val_in, params, cfg, phase.loss);
            if (val_loss < best_val - 1e-12) {
                best_val = val_loss;
                best = params.clone();
                stale = 0;
            } else {
                ++stale;
            }

            EpochStats stats;
            stats.epoch = global_epoch;
            stats.phase = phase_name(phase.loss);
            stats.train_loss = epoch_loss / static_cast<double>(train_slices.size());
            stats.val_loss = val_loss;
            stats.train_acc = static_cast<double>(epoch_hits) / static_cast<double>(train_slices.size());
            stats.val_acc = val_acc;
            stats.best_val = best_val;
            result.history.push_back(stats);
            log::debug("epoch " + std::to_string(global_epoch) + " [" + stats.phase +
                       "] train_loss=" + std::to_string(stats.train_loss) +
                       " val_loss=" + std::to_string(val_loss));

            if (stale >= sched.patience) {
                log::info("early stop in phase " + std::string(phase_name(phase.loss)) +
                          " after epoch " + std::to_string(global_epoch));
                break;
            }
        }
        if (phase.epochs > 0 && std::isfinite(best_val)) params.load_values_from(best);
    }

    result.params = std::move(params);
    return result;
}

}  // namespace

TrainResult train(const data::SliceBatch& train_slices,
                  const data::SliceBatch& val_slices, const ModelConfig& cfg,
                  TrainMode mode, const TrainSchedule& schedule, const ParamStore* init) {
    cfg.validate();
    if (mode != TrainMode::independent)
        return train_single(train_slices, val_slices, cfg, mode, schedule, 0, init);

    const ParamStore init1 = init ? init->with_prefix_stripped("net1.") : ParamStore();
    const ParamStore init2 = init ? init->with_prefix_stripped("net2.") : ParamStore();
    TrainResult net1 = train_single(train_slices, val_slices, cfg, TrainMode::head1_only,
                                    schedule, 1, init ? &init1 : nullptr);
    TrainResult net2 = train_single(train_slices, val_slices, cfg, TrainMode::head2_only,
                                    schedule, 2, init ? &init2 : nullptr);
    TrainResult merged;
    for (auto& [name, t] : net1.params.entries()) merged.params.add("net1." + name, t);
    for (auto& [name, t] : net2.params.entries()) merged.params.add("net2." + name, t);
    for (auto& s : net1.history) {
        s.phase = "net1." + s.phase;
        merged.history.push_back(s);
    }
    const int offset = net1.history.empty() ? 0 : net1.history.back().epoch;
    for (auto& s : net2.history) {
        s.phase = "net2." + s.phase;
        s.epoch += offset;
        merged.history.push_back(s);
    }
    return merged;
}

Evaluation evaluate(const data::SliceBatch& batch, ParamStore& params,
                    const ModelConfig& cfg) {
    if (batch.size() == 0) throw ContractError("evaluate: empty batch");
    RngStream unused(0);
    Evaluation ev;
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Tape tape;
        const auto input = data::normalize(batch.slices[i], batch.mask[i]);
        ForwardOutput out =
            forward(tape, input, batch.mask[i], params, cfg, RunMode::infer, unused);
        ev.joint_loss += joint_loss(tape, out, batch.slice_labels[i], batch.point_labels[i],
                                    batch.mask[i], cfg)
                             .item();
        ev.slice_accuracy += argmax3(out.slice_probs) == batch.slice_labels[i];
        for (std::size_t p = 0; p < batch.mask[i].size(); ++p) {
            if (!batch.mask[i][p]) continue;
            const bool pred = out.point_probs.value()[p] > 0.5;
            const bool truth = batch.point_labels[i][p] > 0.5;
            tp += pred && truth;
            fp += pred && !truth;
            fn += !pred && truth;
        }
    }
    const auto n = static_cast<double>(batch.size());
    ev.joint_loss /= n;
    ev.slice_accuracy /= n;
    const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
    ev.point_f1 = denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 1.0;
    return ev;
}

}  // namespace mma::net
