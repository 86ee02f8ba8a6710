#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mma::data {

// Class ids are fixed everywhere: N=0, AFF=1, AFP=2.
enum class SeriesLabel : int { N = 0, AFF = 1, AFP = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr int kDefaultSamplingRate = 200;

const std::string& label_name(SeriesLabel label);
SeriesLabel label_from_string(const std::string& text);

using Episode = std::pair<std::int64_t, std::int64_t>;  // inclusive sample span

struct SignalRecord {
    std::string record_id;
    int sampling_rate = kDefaultSamplingRate;
    std::vector<double> samples;
    SeriesLabel series_label = SeriesLabel::N;
    std::vector<Episode> episodes;
    std::optional<std::vector<std::int64_t>> beat_positions;
};

// Enforces the record invariants: episodes sorted/non-overlapping/in-range,
// label-episode consistency (N: none; AFF: one spanning >= 90% of the record;
// AFP: >= 1 that does not cover it), and the 5-beat minimum for every episode
// and every gap between consecutive episodes. Throws ValidationError naming
// the record.
void validate_record(const SignalRecord& record, int beat_len);

struct SliceBatch {
    int l_slice = 0;
    std::vector<std::vector<double>> slices;        // B x L, raw amplitudes
    std::vector<std::vector<bool>> mask;            // true = real sample
    std::vector<int> slice_labels;                  // parent record's class id
    std::vector<std::vector<double>> point_labels;  // 1 inside an episode, 0 elsewhere
    std::vector<std::string> record_ids;
    std::vector<std::int64_t> start_offsets;

    std::size_t size() const { return slices.size(); }
    void append(const SliceBatch& other);
};

// Z-scores the unmasked prefix (population std; std < 1e-8 gives zeros) and
// zeroes masked positions.
std::vector<double> normalize(const std::vector<double>& slice,
                              const std::vector<bool>& mask);

// Cuts the record into ceil(len / l_slice) consecutive raw slices,
// zero-padding the final one (mask=false tail) and deriving point labels
// from episode membership of the absolute sample index. Callers normalize
// each slice before feeding the network.
SliceBatch segment(const SignalRecord& record, int l_slice, int beat_len);

}  // namespace mma::data
