#include "mma/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "mma/error.hpp"
#include "mma/init.hpp"
#include "mma/ops.hpp"
#include "mma/optimizer.hpp"
#include "mma/rng.hpp"
#include "mma/tensor.hpp"

namespace mma::post {

void ProportionVector::validate() const {
    double total = 0.0;
    for (double v : p) {
        if (v < 0.0) throw ContractError("proportion vector has a negative component");
        total += v;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw ContractError("proportion vector sums to " + std::to_string(total));
}

void BlendPolicy::validate() const {
    if (theta_normal <= 0.5 || theta_normal > 1.0 || theta_abnormal <= 0.5 ||
        theta_abnormal > 1.0)
        throw ContractError("blend thresholds must lie in (0.5, 1]");
    if (min_episode_samples < 1) throw ContractError("min_episode_samples must be >= 1");
    if (smoothing_window < 1) throw ContractError("smoothing_window must be >= 1");
}

std::vector<double> smooth(const std::vector<double>& point_probs, int window) {
    if (point_probs.empty()) throw ContractError("smooth: empty input");
    if (window < 1) throw ContractError("smooth: window must be >= 1");
    if (window == 1) return point_probs;

    const auto n = static_cast<std::ptrdiff_t>(point_probs.size());
    const std::ptrdiff_t left = (window - 1) / 2;
    const std::ptrdiff_t right = window / 2;
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] =
            prefix[static_cast<std::size_t>(i)] + point_probs[static_cast<std::size_t>(i)];

    std::vector<double> out(point_probs.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - left);
        const std::ptrdiff_t hi = std::min(n, i + right + 1);  // exclusive
        out[static_cast<std::size_t>(i)] =
            (prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)]) /
            static_cast<double>(hi - lo);
    }
    return out;
}

EpisodePrediction extract_episodes(const std::vector<double>& smoothed,
                                   const BlendPolicy& policy) {
    policy.validate();
    for (double v : smoothed)
        if (!(v >= 0.0 && v <= 1.0))
            throw ContractError("extract_episodes: probabilities must lie in [0, 1]");

    const auto n = static_cast<std::int64_t>(smoothed.size());
    std::vector<data::Episode> runs;
    std::int64_t start = -1;
    for (std::int64_t i = 0; i <= n; ++i) {
        const bool abnormal = i < n && smoothed[static_cast<std::size_t>(i)] > 0.5;
        if (abnormal && start < 0) start = i;
        if (!abnormal && start >= 0) {
            if (i - start >= policy.min_episode_samples) runs.emplace_back(start, i - 1);
            start = -1;
        }
    }

    EpisodePrediction result;
    result.smoothed = smoothed;
    for (const data::Episode& run : runs) {
        if (!result.intervals.empty() &&
            run.first - result.intervals.back().second - 1 < policy.min_episode_samples)
            result.intervals.back().second = run.second;
        else
            result.intervals.push_back(run);
    }
    return result;
}

BlendResult blend(data::SeriesLabel head1_class, const std::vector<double>& smoothed,
                  const BlendPolicy& policy) {
    policy.validate();
    if (smoothed.empty()) throw ContractError("blend: empty smoothed probabilities");
    const auto n = static_cast<std::int64_t>(smoothed.size());

    if (head1_class == data::SeriesLabel::N) return {data::SeriesLabel::N, {}};
    if (head1_class == data::SeriesLabel::AFF)
        return {data::SeriesLabel::AFF, {{0, n - 1}}};

    std::int64_t above = 0;
    for (double v : smoothed) above += v > 0.5;
    const double r = static_cast<double>(above) / static_cast<double>(n);
    if (r <= 1.0 - policy.theta_normal) return {data::SeriesLabel::N, {}};
    if (r >= policy.theta_abnormal) return {data::SeriesLabel::AFF, {{0, n - 1}}};
    return {data::SeriesLabel::AFP, extract_episodes(smoothed, policy).intervals};
}

namespace {

ParamStore mlp_params(RngStream* rng) {
    ParamStore store;
    store.add("w1", rng ? init_weight({kProportionHidden, 3}, 3, kProportionHidden, *rng,
                                      InitScheme::glorot)
                        : Tensor::zeros({kProportionHidden, 3}, true));
    store.add("b1", Tensor::zeros({kProportionHidden}, true));
    store.add("w2", rng ? init_weight({3, kProportionHidden}, kProportionHidden, 3, *rng,
                                      InitScheme::glorot)
                        : Tensor::zeros({3, kProportionHidden}, true));
    store.add("b2", Tensor::zeros({3}, true));
    return store;
}

Tensor mlp_probs(Tape& tape, const ParamStore& params, const ProportionVector& p) {
    Tensor x = Tensor::from({1, 3}, {p.p[0], p.p[1], p.p[2]});
    Tensor z1 = ops::tanh(
        tape, ops::add_rowvec(tape, ops::matmul(tape, x, ops::transpose(tape, params.get("w1"))),
                              params.get("b1")));
    Tensor logits = ops::add_rowvec(
        tape, ops::matmul(tape, z1, ops::transpose(tape, params.get("w2"))),
        params.get("b2"));
    return ops::softmax(tape, ops::reshape(tape, logits, {3}));
}

}  // namespace

ProportionMlp zero_proportion_mlp() { return {mlp_params(nullptr)}; }

ProportionMlp proportion_mlp_train(const std::vector<ProportionVector>& inputs,
                                   const std::vector<data::SeriesLabel>& labels,
                                   const MlpOptions& options) {
    if (inputs.empty() || inputs.size() != labels.size())
        throw ContractError("proportion mlp: need matching non-empty inputs and labels");
    if (options.epochs < 0) throw ContractError("proportion mlp: negative epochs");
    int counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        inputs[i].validate();
        counts[static_cast<int>(labels[i])]++;
    }
    for (int c = 0; c < 3; ++c)
        if (counts[c] == 0)
            throw DataError("proportion mlp: no training example for class " +
                            data::label_name(static_cast<data::SeriesLabel>(c)));

    RngStream rng = RngStream::derive(options.seed, 0xB1E);
    ProportionMlp mlp{mlp_params(&rng)};
    AdamOptimizer opt({options.lr, 0.9, 0.999, 1e-8});
    const double inv = 1.0 / static_cast<double>(inputs.size());
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            Tape tape;
            Tensor probs = mlp_probs(tape, mlp.params, inputs[i]);
            Tensor loss = ops::scale(
                tape,
                ops::categorical_cross_entropy(tape, probs, static_cast<int>(labels[i])),
                inv);
            tape.backward(loss);
        }
        opt.step(mlp.params);
    }
    return mlp;
}

data::SeriesLabel proportion_mlp_apply(const ProportionMlp& mlp, const ProportionVector& p) {
    p.validate();
    Tape tape;
    Tensor probs = mlp_probs(tape, mlp.params, p);
    // exact ties resolve to the riskier class
    const int risk_order[3] = {static_cast<int>(data::SeriesLabel::AFF),
                               static_cast<int>(data::SeriesLabel::AFP),
                               static_cast<int>(data::SeriesLabel::N)};
    int best = risk_order[0];
    for (int k = 1; k < 3; ++k) {
        const int c = risk_order[k];
        if (probs.value()[static_cast<std::size_t>(c)] >
            probs.value()[static_cast<std::size_t>(best)])
            best = c;
    }
    return static_cast<data::SeriesLabel>(best);
}

std::string prediction_to_json(const Prediction& prediction) {
    nlohmann::json j;
    j["record_id"] = prediction.record_id;
    j["predicted_label"] = data::label_name(prediction.label);
    nlohmann::json eps = nlohmann::json::array();
    for (const data::Episode& e : prediction.episodes)
        eps.push_back(nlohmann::json::array({e.first, e.second}));
    j["episodes"] = eps;
    return j.dump(2) + "\n";
}

Prediction prediction_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("prediction: ") + e.what());
    }
    Prediction pred;
    try {
        pred.record_id = j.at("record_id").get<std::string>();
        pred.label = data::label_from_string(j.at("predicted_label").get<std::string>());
        for (const auto& e : j.at("episodes")) {
            if (!e.is_array() || e.size() != 2)
                throw ParseError("prediction: episode entries must be [onset, end] pairs");
            pred.episodes.emplace_back(e[0].get<std::int64_t>(), e[1].get<std::int64_t>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("prediction: ") + e.what());
    } catch (const LabelError& e) {
        throw ParseError(std::string("prediction: ") + e.what());
    }
    return pred;
}

}  // namespace mma::post
