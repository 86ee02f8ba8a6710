#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mma/signal.hpp"

namespace mma::data {

// Parameters for the synthetic annotated corpus. Segment boundaries are
// aligned to whole beats and every episode/gap carries at least
// min_segment_beats beats, so generated records always validate.
struct SynthSpec {
    int count = 60;
    std::array<double, 3> mix = {0.5, 1.0 / 3.0, 1.0 / 6.0};  // N, AFF, AFP
    std::int64_t min_len = 4500;   // target record length range, samples
    std::int64_t max_len = 9000;   // (records end on a beat boundary at >= target)
    int sampling_rate = kDefaultSamplingRate;
    int beat_len = 150;            // nominal samples per beat
    double bpm_jitter = 0.04;      // normal-rhythm period jitter, fraction
    double rate_perturbation = 0.22;  // AF per-beat period irregularity, fraction
    double af_rate_factor = 0.85;  // AF mean period relative to normal
    double irregularity_amplitude = 0.35;  // fibrillatory-wave amplitude
    double fibrillation_hz = 7.0;
    double noise_std = 0.04;
    int min_segment_beats = 6;     // per alternating segment in AFP records
    int max_segment_beats = 18;
    std::uint64_t seed = 1;
};

// Deterministic under spec.seed. Throws SpecError on infeasible parameters.
std::vector<SignalRecord> synthesize(const SynthSpec& spec);

}  // namespace mma::data
