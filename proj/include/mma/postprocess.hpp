#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mma/param_store.hpp"
#include "mma/signal.hpp"

namespace mma::post {

// Fractions of a record's slices predicted N / AFF / AFP, indexed by class id.
struct ProportionVector {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    void validate() const;  // nonnegative, sums to 1 +- 1e-9
};

struct BlendPolicy {
    double theta_normal = 0.98;    // point ratio <= 1 - theta_normal demotes AFP to N
    double theta_abnormal = 0.98;  // point ratio >= theta_abnormal promotes AFP to AFF
    int min_episode_samples = 750;
    int smoothing_window = 1200;
    void validate() const;
};

struct EpisodePrediction {
    std::vector<data::Episode> intervals;  // sorted, non-overlapping
    std::vector<double> smoothed;
};

// Centered moving average with the window truncated at the record edges.
// window == 1 is the exact identity.
std::vector<double> smooth(const std::vector<double>& point_probs, int window);

// Threshold at 0.5, drop abnormal runs shorter than min_episode_samples,
// then merge runs separated by gaps shorter than min_episode_samples.
EpisodePrediction extract_episodes(const std::vector<double>& smoothed,
                                   const BlendPolicy& policy);

struct BlendResult {
    data::SeriesLabel label = data::SeriesLabel::N;
    std::vector<data::Episode> episodes;
};

// Head1 N/AFF pass straight through (no episodes / one whole-record episode).
// For AFP the abnormal-point ratio r of the smoothed probabilities decides:
// r <= 1-theta_normal -> N, r >= theta_abnormal -> AFF, else AFP with
// extracted episodes.
BlendResult blend(data::SeriesLabel head1_class, const std::vector<double>& smoothed,
                  const BlendPolicy& policy);

inline constexpr int kProportionHidden = 100;

struct ProportionMlp {
    ParamStore params;  // w1 [100x3], b1 [100], w2 [3x100], b2 [3]
};

struct MlpOptions {
    int epochs = 300;
    double lr = 0.05;
    std::uint64_t seed = 1;
};

ProportionMlp zero_proportion_mlp();

// Fits the 3 -> 100 (tanh) -> 3 softmax classifier on proportion vectors vs
// true series labels. Every class must be represented at least once.
ProportionMlp proportion_mlp_train(const std::vector<ProportionVector>& inputs,
                                   const std::vector<data::SeriesLabel>& labels,
                                   const MlpOptions& options = {});

// Argmax of the classifier output; exact ties break toward the riskier
// class, AFF over AFP over N.
data::SeriesLabel proportion_mlp_apply(const ProportionMlp& mlp,
                                       const ProportionVector& p);

struct Prediction {
    std::string record_id;
    data::SeriesLabel label = data::SeriesLabel::N;
    std::vector<data::Episode> episodes;
};

std::string prediction_to_json(const Prediction& prediction);
Prediction prediction_from_json(const std::string& text);

}  // namespace mma::post
