#include "mma/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mma/error.hpp"
#include "mma/rng.hpp"

namespace mma::data {

namespace {

struct Beat {
    std::int64_t onset = 0;
    int period = 0;
    bool af = false;
    double qrs_amp = 1.0;
};

double bump(double phase, double center, double width) {
    const double d = (phase - center) / width;
    return std::exp(-0.5 * d * d);
}

void check_spec(const SynthSpec& s) {
    auto fail = [](const std::string& msg) { throw SpecError("synth spec: " + msg); };
    if (s.count < 1) fail("count must be >= 1");
    double sum = 0.0;
    for (double m : s.mix) {
        if (m < 0) fail("negative class proportion");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("class proportions must sum to 1");
    if (s.beat_len < 4) fail("beat_len must be >= 4 samples");
    if (s.sampling_rate <= 0) fail("sampling_rate must be positive");
    if (s.min_len < 1 || s.min_len > s.max_len) fail("bad length range");
    if (s.bpm_jitter < 0 || s.bpm_jitter >= 0.5) fail("bpm_jitter must be in [0, 0.5)");
    if (s.rate_perturbation < 0 || s.rate_perturbation >= 0.5)
        fail("rate_perturbation must be in [0, 0.5)");
    if (s.af_rate_factor <= 0) fail("af_rate_factor must be positive");
    if (s.noise_std < 0) fail("noise_std must be nonnegative");
    if (s.min_len < 5 * static_cast<std::int64_t>(s.beat_len))
        fail("min_len shorter than the 5-beat minimum");
    if (s.mix[2] > 0) {
        if (s.min_segment_beats < 5)
            fail("AFP segments of " + std::to_string(s.min_segment_beats) +
                 " beats break the 5-beat minimum");
        if (s.max_segment_beats < s.min_segment_beats) fail("bad segment-beat range");
        if (s.min_len < 2 * static_cast<std::int64_t>(s.min_segment_beats) * s.beat_len)
            fail("min_len cannot fit two alternating AFP segments");
    }
}

int draw_period(const SynthSpec& s, bool af, RngStream& rng) {
    double p;
    if (af) {
        p = s.beat_len * s.af_rate_factor * (1.0 + s.rate_perturbation * rng.uniform(-1, 1));
    } else {
        p = s.beat_len * (1.0 + s.bpm_jitter * rng.uniform(-1, 1));
    }
    return std::max(4, static_cast<int>(std::llround(p)));
}

std::vector<Beat> plan_beats(const SynthSpec& s, SeriesLabel label, std::int64_t target,
                             RngStream& rng) {
    std::vector<Beat> beats;
    std::int64_t pos = 0;
    auto push_beat = [&](bool af) {
        Beat b;
        b.onset = pos;
        b.period = draw_period(s, af, rng);
        b.af = af;
        b.qrs_amp = 1.0 + (af ? 0.15 : 0.05) * rng.uniform(-1, 1);
        pos += b.period;
        beats.push_back(b);
    };

    if (label == SeriesLabel::AFP) {
        bool af = rng.uniform() < 0.5;
        int segments = 0;
        const std::int64_t floor_samples = 5 * static_cast<std::int64_t>(s.beat_len);
        while (segments < 2 || pos < target) {
            const std::int64_t seg_start = pos;
            const auto n = static_cast<int>(
                rng.uniform_int(s.min_segment_beats, s.max_segment_beats));
            for (int k = 0; k < n; ++k) push_beat(af);
            // episodes/gaps must span 5 nominal beats in samples, not just count
            while (pos - seg_start < floor_samples) push_beat(af);
            af = !af;
            ++segments;
        }
    } else {
        const bool af = label == SeriesLabel::AFF;
        while (pos < target || beats.size() < 6) push_beat(af);
    }
    return beats;
}

}  // namespace

std::vector<SignalRecord> synthesize(const SynthSpec& spec) {
    check_spec(spec);

    // exact class counts by largest remainder
    std::array<std::size_t, kNumClasses> counts{};
    std::array<double, kNumClasses> rem{};
    std::size_t assigned = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const double ideal = spec.mix[static_cast<std::size_t>(c)] * spec.count;
        counts[static_cast<std::size_t>(c)] = static_cast<std::size_t>(ideal);
        rem[static_cast<std::size_t>(c)] = ideal - std::floor(ideal);
        assigned += counts[static_cast<std::size_t>(c)];
    }
    std::array<int, kNumClasses> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (rem[static_cast<std::size_t>(a)] != rem[static_cast<std::size_t>(b)])
            return rem[static_cast<std::size_t>(a)] > rem[static_cast<std::size_t>(b)];
        return a < b;
    });
    for (std::size_t left = static_cast<std::size_t>(spec.count) - assigned, k = 0;
         k < left; ++k)
        ++counts[static_cast<std::size_t>(order[k % kNumClasses])];

    std::vector<SeriesLabel> labels;
    for (int c = 0; c < kNumClasses; ++c)
        labels.insert(labels.end(), counts[static_cast<std::size_t>(c)],
                      static_cast<SeriesLabel>(c));
    RngStream shuffle_rng = RngStream::derive(spec.seed, 0xA55);
    for (std::size_t i = labels.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(
            shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(labels[i - 1], labels[j]);
    }

    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<SignalRecord> records;
    records.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        RngStream rng = RngStream::derive(spec.seed, 1000 + i);
        const std::int64_t target = rng.uniform_int(spec.min_len, spec.max_len);
        const std::vector<Beat> beats = plan_beats(spec, labels[i], target, rng);

        SignalRecord rec;
        char id[16];
        std::snprintf(id, sizeof(id), "syn%04zu", i);
        rec.record_id = id;
        rec.sampling_rate = spec.sampling_rate;
        rec.series_label = labels[i];
        rec.beat_positions = std::vector<std::int64_t>();

        double fib_phase = rng.uniform(0.0, two_pi);
        for (const Beat& b : beats) {
            rec.beat_positions->push_back(b.onset);
            for (int k = 0; k < b.period; ++k) {
                const double phase = static_cast<double>(k) / b.period;
                double v = b.qrs_amp * 1.5 * bump(phase, 0.15, 0.04) +
                           0.35 * bump(phase, 0.45, 0.10);
                if (b.af) {
                    // fibrillatory oscillation with a slowly wandering phase
                    fib_phase += two_pi * spec.fibrillation_hz / spec.sampling_rate *
                                 (1.0 + 0.25 * rng.uniform(-1, 1));
                    v += spec.irregularity_amplitude * std::sin(fib_phase);
                } else {
                    v += 0.2 * bump(phase, 0.85, 0.06);
                }
                v += spec.noise_std * rng.normal();
                rec.samples.push_back(v);
            }
        }

        // episodes = maximal runs of AF beats
        for (std::size_t b = 0; b < beats.size();) {
            if (!beats[b].af) {
                ++b;
                continue;
            }
            std::size_t e = b;
            while (e + 1 < beats.size() && beats[e + 1].af) ++e;
            rec.episodes.emplace_back(beats[b].onset,
                                      beats[e].onset + beats[e].period - 1);
            b = e + 1;
        }

        validate_record(rec, spec.beat_len);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace mma::data
