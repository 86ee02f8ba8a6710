#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mma/error.hpp"
#include "mma/postprocess.hpp"
#include "mma/rng.hpp"

using namespace mma;

namespace {

post::BlendPolicy policy_with(int min_samples, int window = 1200) {
    post::BlendPolicy p;
    p.min_episode_samples = min_samples;
    p.smoothing_window = window;
    return p;
}

std::vector<double> binary_string(int n, double fill_prob, RngStream& rng) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.uniform() < fill_prob ? 1.0 : 0.0;
    return v;
}

}  // namespace

TEST_CASE("smooth") {
    SUBCASE("window one is the exact identity") {
        std::vector<double> x = {0.1, 0.9, 0.30000000000000004, 1e-17};
        CHECK(post::smooth(x, 1) == x);
    }

    SUBCASE("constant input stays constant") {
        std::vector<double> x(500, 0.7);
        for (double v : post::smooth(x, 40))
            CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
    }

    SUBCASE("truncated edges") {
        const std::vector<double> out = post::smooth({0, 0, 1, 1}, 3);
        REQUIRE(out.size() == 4);
        CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(out[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(out[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(out[3] == doctest::Approx(1.0).epsilon(1e-15));
    }

    SUBCASE("even window leans right") {
        // window 4 at i covers [i-1, i+2]
        const std::vector<double> out = post::smooth({1, 0, 0, 0, 0}, 4);
        CHECK(out[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(out[1] == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(out[2] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(out[3] == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("bounded by the input range") {
        RngStream rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> x(200);
            for (auto& v : x) v = rng.uniform(-3.0, 3.0);
            const int window = static_cast<int>(rng.uniform_int(1, 80));
            const double lo = *std::min_element(x.begin(), x.end());
            const double hi = *std::max_element(x.begin(), x.end());
            for (double v : post::smooth(x, window)) {
                CHECK(v >= lo - 1e-12);
                CHECK(v <= hi + 1e-12);
            }
        }
    }

    SUBCASE("window longer than the record averages everything") {
        const std::vector<double> out = post::smooth({0.0, 1.0}, 99);
        CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-15));
    }

    SUBCASE("contract errors") {
        CHECK_THROWS_AS(post::smooth({}, 3), ContractError);
        CHECK_THROWS_AS(post::smooth({0.5}, 0), ContractError);
    }
}

TEST_CASE("extract_episodes") {
    SUBCASE("all zeros give no episodes") {
        std::vector<double> x(3000, 0.0);
        CHECK(post::extract_episodes(x, policy_with(750)).intervals.empty());
    }

    SUBCASE("all ones give one whole-record episode") {
        std::vector<double> x(3000, 1.0);
        const auto eps = post::extract_episodes(x, policy_with(750)).intervals;
        REQUIRE(eps.size() == 1);
        CHECK(eps[0] == data::Episode{0, 2999});
    }

    SUBCASE("short gap merges two runs") {
        std::vector<double> x(3000, 0.0);
        std::fill(x.begin() + 100, x.begin() + 900, 1.0);    // 800 samples
        std::fill(x.begin() + 1000, x.begin() + 1800, 1.0);  // 800 after a 100 gap
        const auto eps = post::extract_episodes(x, policy_with(750)).intervals;
        REQUIRE(eps.size() == 1);
        CHECK(eps[0] == data::Episode{100, 1799});
        CHECK(eps[0].second - eps[0].first + 1 == 1700);
    }

    SUBCASE("short runs are dropped before merging") {
        std::vector<double> x(4000, 0.0);
        std::fill(x.begin() + 0, x.begin() + 749, 1.0);      // 749 < 750: dropped
        std::fill(x.begin() + 1500, x.begin() + 2250, 1.0);  // exactly 750: kept
        const auto eps = post::extract_episodes(x, policy_with(750)).intervals;
        REQUIRE(eps.size() == 1);
        CHECK(eps[0] == data::Episode{1500, 2249});
    }

    SUBCASE("wide gaps stay separate") {
        std::vector<double> x(4000, 0.0);
        std::fill(x.begin() + 0, x.begin() + 800, 1.0);
        std::fill(x.begin() + 1550, x.begin() + 2350, 1.0);  // gap 750: not merged
        const auto eps = post::extract_episodes(x, policy_with(750)).intervals;
        REQUIRE(eps.size() == 2);
        CHECK(eps[0] == data::Episode{0, 799});
        CHECK(eps[1] == data::Episode{1550, 2349});
    }

    SUBCASE("threshold is strict") {
        std::vector<double> x(100, 0.5);  // 0.5 is not > 0.5
        CHECK(post::extract_episodes(x, policy_with(10)).intervals.empty());
    }

    SUBCASE("interval and gap minimums hold over random binary strings") {
        RngStream rng(77);
        for (int trial = 0; trial < 2000; ++trial) {
            const int n = static_cast<int>(rng.uniform_int(1, 400));
            const int min_len = static_cast<int>(rng.uniform_int(1, 60));
            const std::vector<double> x = binary_string(n, rng.uniform(), rng);
            const auto eps = post::extract_episodes(x, policy_with(min_len)).intervals;
            for (std::size_t i = 0; i < eps.size(); ++i) {
                CHECK(eps[i].second - eps[i].first + 1 >= min_len);
                CHECK(eps[i].first >= 0);
                CHECK(eps[i].second < n);
                if (i > 0) {
                    CHECK(eps[i].first > eps[i - 1].second);
                    CHECK(eps[i].first - eps[i - 1].second - 1 >= min_len);
                }
            }
        }
    }

    SUBCASE("rejects out-of-range probabilities") {
        CHECK_THROWS_AS(post::extract_episodes({0.2, 1.4}, policy_with(1)), ContractError);
        CHECK_THROWS_AS(post::extract_episodes({-0.1}, policy_with(1)), ContractError);
    }
}

TEST_CASE("blend") {
    post::BlendPolicy policy = policy_with(750);

    SUBCASE("head1 N passes through without episodes") {
        std::vector<double> points(3000, 0.99);  // even unanimous points cannot override
        const post::BlendResult r = post::blend(data::SeriesLabel::N, points, policy);
        CHECK(r.label == data::SeriesLabel::N);
        CHECK(r.episodes.empty());
    }

    SUBCASE("head1 AFF claims the whole record") {
        std::vector<double> points(3000, 0.0);
        const post::BlendResult r = post::blend(data::SeriesLabel::AFF, points, policy);
        CHECK(r.label == data::SeriesLabel::AFF);
        REQUIRE(r.episodes.size() == 1);
        CHECK(r.episodes[0] == data::Episode{0, 2999});
    }

    SUBCASE("AFP with near-unanimous abnormal points becomes AFF") {
        std::vector<double> points(3000, 0.99);
        const post::BlendResult r = post::blend(data::SeriesLabel::AFP, points, policy);
        CHECK(r.label == data::SeriesLabel::AFF);
        REQUIRE(r.episodes.size() == 1);
        CHECK(r.episodes[0] == data::Episode{0, 2999});
    }

    SUBCASE("AFP with almost no abnormal points becomes N") {
        std::vector<double> points(3000, 0.01);
        const post::BlendResult r = post::blend(data::SeriesLabel::AFP, points, policy);
        CHECK(r.label == data::SeriesLabel::N);
        CHECK(r.episodes.empty());
    }

    SUBCASE("threshold boundaries are inclusive") {
        std::vector<double> low(100, 0.0);
        low[0] = 1.0;
        low[1] = 1.0;  // r = 0.02 <= 1 - 0.98
        CHECK(post::blend(data::SeriesLabel::AFP, low, policy).label == data::SeriesLabel::N);

        std::vector<double> high(100, 1.0);
        high[0] = 0.0;
        high[1] = 0.0;  // r = 0.98 >= 0.98
        CHECK(post::blend(data::SeriesLabel::AFP, high, policy).label ==
              data::SeriesLabel::AFF);
    }

    SUBCASE("mixed AFP keeps extracted episodes") {
        std::vector<double> points(4000, 0.0);
        std::fill(points.begin() + 500, points.begin() + 1500, 0.9);
        std::fill(points.begin() + 2500, points.begin() + 3500, 0.9);
        const post::BlendResult r = post::blend(data::SeriesLabel::AFP, points, policy);
        CHECK(r.label == data::SeriesLabel::AFP);
        CHECK(r.episodes == post::extract_episodes(points, policy).intervals);
        REQUIRE(r.episodes.size() == 2);
        CHECK(r.episodes[0] == data::Episode{500, 1499});
        CHECK(r.episodes[1] == data::Episode{2500, 3499});
    }

    SUBCASE("policy and input validation") {
        post::BlendPolicy bad = policy;
        bad.theta_normal = 0.5;
        std::vector<double> points(100, 0.0);
        CHECK_THROWS_AS(post::blend(data::SeriesLabel::N, points, bad), ContractError);
        bad = policy;
        bad.theta_abnormal = 1.5;
        CHECK_THROWS_AS(post::blend(data::SeriesLabel::N, points, bad), ContractError);
        bad = policy;
        bad.smoothing_window = 0;
        CHECK_THROWS_AS(post::blend(data::SeriesLabel::N, points, bad), ContractError);
        CHECK_THROWS_AS(post::blend(data::SeriesLabel::AFP, {}, policy), ContractError);
    }
}

TEST_CASE("proportion mlp") {
    SUBCASE("proportion vector validation") {
        post::ProportionVector ok{{0.2, 0.3, 0.5}};
        CHECK_NOTHROW(ok.validate());
        post::ProportionVector negative{{-0.1, 0.6, 0.5}};
        CHECK_THROWS_AS(negative.validate(), ContractError);
        post::ProportionVector off{{0.2, 0.2, 0.2}};
        CHECK_THROWS_AS(off.validate(), ContractError);
    }

    SUBCASE("zero mlp ties break to the riskiest class") {
        const post::ProportionMlp mlp = post::zero_proportion_mlp();
        CHECK(post::proportion_mlp_apply(mlp, {{1.0, 0.0, 0.0}}) == data::SeriesLabel::AFF);
        CHECK(post::proportion_mlp_apply(mlp, {{0.0, 0.0, 1.0}}) == data::SeriesLabel::AFF);
    }

    SUBCASE("apply is deterministic") {
        RngStream rng(3);
        std::vector<post::ProportionVector> inputs;
        std::vector<data::SeriesLabel> labels;
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 4; ++k) {
                post::ProportionVector p;
                p.p[static_cast<std::size_t>(c)] = 0.8;
                p.p[static_cast<std::size_t>((c + 1) % 3)] = 0.1;
                p.p[static_cast<std::size_t>((c + 2) % 3)] = 0.1;
                inputs.push_back(p);
                labels.push_back(static_cast<data::SeriesLabel>(c));
            }
        post::MlpOptions opts;
        opts.epochs = 50;
        const post::ProportionMlp mlp = post::proportion_mlp_train(inputs, labels, opts);
        const post::ProportionVector probe{{0.4, 0.3, 0.3}};
        CHECK(post::proportion_mlp_apply(mlp, probe) ==
              post::proportion_mlp_apply(mlp, probe));

        const post::ProportionMlp again = post::proportion_mlp_train(inputs, labels, opts);
        for (const auto& [name, t] : mlp.params.entries())
            CHECK(t.value() == again.params.get(name).value());
    }

    SUBCASE("separable proportions train to the obvious classifier") {
        RngStream rng(11);
        std::vector<post::ProportionVector> inputs;
        std::vector<data::SeriesLabel> labels;
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 30; ++k) {
                const double main = rng.uniform(0.7, 0.95);
                const double split = rng.uniform();
                post::ProportionVector p;
                p.p[static_cast<std::size_t>(c)] = main;
                p.p[static_cast<std::size_t>((c + 1) % 3)] = (1.0 - main) * split;
                p.p[static_cast<std::size_t>((c + 2) % 3)] = (1.0 - main) * (1.0 - split);
                inputs.push_back(p);
                labels.push_back(static_cast<data::SeriesLabel>(c));
            }
        const post::ProportionMlp mlp = post::proportion_mlp_train(inputs, labels);
        CHECK(post::proportion_mlp_apply(mlp, {{1.0, 0.0, 0.0}}) == data::SeriesLabel::N);
        CHECK(post::proportion_mlp_apply(mlp, {{0.0, 1.0, 0.0}}) == data::SeriesLabel::AFF);
        CHECK(post::proportion_mlp_apply(mlp, {{0.0, 0.0, 1.0}}) == data::SeriesLabel::AFP);
        int hits = 0;
        for (std::size_t i = 0; i < inputs.size(); ++i)
            hits += post::proportion_mlp_apply(mlp, inputs[i]) == labels[i];
        CHECK(hits == static_cast<int>(inputs.size()));
    }

    SUBCASE("training rejects missing classes and bad shapes") {
        std::vector<post::ProportionVector> inputs = {{{1.0, 0.0, 0.0}}, {{0.0, 1.0, 0.0}}};
        std::vector<data::SeriesLabel> labels = {data::SeriesLabel::N, data::SeriesLabel::AFF};
        CHECK_THROWS_AS(post::proportion_mlp_train(inputs, labels), DataError);
        CHECK_THROWS_AS(post::proportion_mlp_train({}, {}), ContractError);
        inputs.push_back({{0.0, 0.0, 1.0}});
        CHECK_THROWS_AS(post::proportion_mlp_train(inputs, labels), ContractError);
    }
}

TEST_CASE("prediction serialization") {
    SUBCASE("round trip") {
        post::Prediction pred;
        pred.record_id = "rec42";
        pred.label = data::SeriesLabel::AFP;
        pred.episodes = {{100, 899}, {1500, 2299}};
        const post::Prediction back = post::prediction_from_json(post::prediction_to_json(pred));
        CHECK(back.record_id == pred.record_id);
        CHECK(back.label == pred.label);
        CHECK(back.episodes == pred.episodes);
    }

    SUBCASE("rejects malformed documents") {
        CHECK_THROWS_AS(post::prediction_from_json("{"), ParseError);
        CHECK_THROWS_AS(post::prediction_from_json("{\"record_id\":\"r\"}"), ParseError);
        CHECK_THROWS_AS(post::prediction_from_json(
                            "{\"record_id\":\"r\",\"predicted_label\":\"AF\",\"episodes\":[]}"),
                        ParseError);
        CHECK_THROWS_AS(post::prediction_from_json(
                            "{\"record_id\":\"r\",\"predicted_label\":\"N\",\"episodes\":[[1]]}"),
                        ParseError);
    }
}
