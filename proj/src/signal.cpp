#include "mma/signal.hpp"

#include <algorithm>
#include <cmath>

#include "mma/error.hpp"

namespace mma::data {

const std::string& label_name(SeriesLabel label) {
    static const std::string names[] = {"N", "AFF", "AFP"};
    return names[static_cast<int>(label)];
}

SeriesLabel label_from_string(const std::string& text) {
    if (text == "N") return SeriesLabel::N;
    if (text == "AFF") return SeriesLabel::AFF;
    if (text == "AFP") return SeriesLabel::AFP;
    throw LabelError("unknown series label '" + text + "' (expected N, AFF or AFP)");
}

namespace {

// Number of annotated beats whose position falls inside [lo, hi].
std::int64_t beats_in_span(const std::vector<std::int64_t>& beats, std::int64_t lo,
                           std::int64_t hi) {
    auto first = std::lower_bound(beats.begin(), beats.end(), lo);
    auto last = std::upper_bound(beats.begin(), beats.end(), hi);
    return last - first;
}

void require_five_beats(const SignalRecord& r, std::int64_t lo, std::int64_t hi,
                        int beat_len, const char* what) {
    bool ok;
    if (r.beat_positions) {
        ok = beats_in_span(*r.beat_positions, lo, hi) >= 5;
    } else {
        ok = (hi - lo + 1) >= 5 * static_cast<std::int64_t>(beat_len);
    }
    if (!ok) {
        throw ValidationError("record " + r.record_id + ": " + what + " [" +
                              std::to_string(lo) + "," + std::to_string(hi) +
                              "] spans fewer than 5 beats");
    }
}

}  // namespace

void validate_record(const SignalRecord& r, int beat_len) {
    if (r.record_id.empty())
        throw ValidationError("record with empty record_id");
    if (r.sampling_rate <= 0)
        throw ValidationError("record " + r.record_id + ": non-positive sampling rate");
    if (r.samples.empty())
        throw ValidationError("record " + r.record_id + ": no samples");
    const auto len = static_cast<std::int64_t>(r.samples.size());

    if (r.beat_positions &&
        !std::is_sorted(r.beat_positions->begin(), r.beat_positions->end()))
        throw ValidationError("record " + r.record_id + ": beat_positions not sorted");

    std::int64_t prev_end = -1;
    for (const auto& [on, end] : r.episodes) {
        if (on < 0 || end >= len || on > end)
            throw ValidationError("record " + r.record_id + ": episode [" +
                                  std::to_string(on) + "," + std::to_string(end) +
                                  "] outside [0," + std::to_string(len - 1) + "]");
        if (on <= prev_end)
            throw ValidationError("record " + r.record_id +
                                  ": episodes overlap or are unsorted at [" +
                                  std::to_string(on) + "," + std::to_string(end) + "]");
        prev_end = end;
    }

    switch (r.series_label) {
        case SeriesLabel::N:
            if (!r.episodes.empty())
                throw ValidationError("record " + r.record_id +
                                      ": label N with annotated episodes");
            break;
        case SeriesLabel::AFF: {
            if (r.episodes.size() != 1)
                throw ValidationError("record " + r.record_id +
                                      ": label AFF needs exactly one episode, has " +
                                      std::to_string(r.episodes.size()));
            const auto& [on, end] = r.episodes.front();
            // "effectively the whole record": at least 90% of the samples
            if ((end - on + 1) * 10 < len * 9)
                throw ValidationError("record " + r.record_id +
                                      ": label AFF episode covers less than 90% of the record");
            break;
        }
        case SeriesLabel::AFP: {
            if (r.episodes.empty())
                throw ValidationError("record " + r.record_id +
                                      ": label AFP with no episodes");
            if (r.episodes.size() == 1 && r.episodes.front().first == 0 &&
                r.episodes.front().second == len - 1)
                throw ValidationError("record " + r.record_id +
                                      ": label AFP episode covers the whole record");
            break;
        }
    }

    for (const auto& [on, end] : r.episodes)
        require_five_beats(r, on, end, beat_len, "episode");
    for (std::size_t i = 1; i < r.episodes.size(); ++i)
        require_five_beats(r, r.episodes[i - 1].second + 1, r.episodes[i].first - 1,
                           beat_len, "inter-episode gap");
}

void SliceBatch::append(const SliceBatch& other) {
    if (l_slice == 0) l_slice = other.l_slice;
    if (l_slice != other.l_slice)
        throw ContractError("SliceBatch::append: slice length mismatch");
    slices.insert(slices.end(), other.slices.begin(), other.slices.end());
    mask.insert(mask.end(), other.mask.begin(), other.mask.end());
    slice_labels.insert(slice_labels.end(), other.slice_labels.begin(),
                        other.slice_labels.end());
    point_labels.insert(point_labels.end(), other.point_labels.begin(),
                        other.point_labels.end());
    record_ids.insert(record_ids.end(), other.record_ids.begin(), other.record_ids.end());
    start_offsets.insert(start_offsets.end(), other.start_offsets.begin(),
                         other.start_offsets.end());
}

std::vector<double> normalize(const std::vector<double>& slice,
                              const std::vector<bool>& mask) {
    if (slice.size() != mask.size())
        throw DimensionError("normalize: slice and mask lengths differ");
    std::size_t n = 0;
    double mean = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        if (mask[i]) {
            mean += slice[i];
            ++n;
        }
    }
    if (n == 0) throw DegenerateInputError("normalize: fully masked slice");
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        if (mask[i]) var += (slice[i] - mean) * (slice[i] - mean);
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    std::vector<double> out(slice.size(), 0.0);
    if (sd < 1e-8) return out;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        if (mask[i]) out[i] = (slice[i] - mean) / sd;
    }
    return out;
}

SliceBatch segment(const SignalRecord& r, int l_slice, int beat_len) {
    if (l_slice <= 0 || beat_len <= 0 || l_slice % beat_len != 0)
        throw ContractError("segment: slice length " + std::to_string(l_slice) +
                            " must be a positive multiple of beat length " +
                            std::to_string(beat_len));
    if (r.samples.empty()) throw DegenerateInputError("segment: empty record " + r.record_id);

    const auto len = static_cast<std::int64_t>(r.samples.size());
    const auto n_slices = (len + l_slice - 1) / l_slice;

    SliceBatch batch;
    batch.l_slice = l_slice;
    for (std::int64_t s = 0; s < n_slices; ++s) {
        const std::int64_t start = s * l_slice;
        const std::int64_t real = std::min<std::int64_t>(l_slice, len - start);
        std::vector<double> raw(static_cast<std::size_t>(l_slice), 0.0);
        std::vector<bool> mask(static_cast<std::size_t>(l_slice), false);
        std::vector<double> labels(static_cast<std::size_t>(l_slice), 0.0);
        for (std::int64_t i = 0; i < real; ++i) {
            raw[static_cast<std::size_t>(i)] = r.samples[static_cast<std::size_t>(start + i)];
            mask[static_cast<std::size_t>(i)] = true;
        }
        for (const auto& [on, end] : r.episodes) {
            const std::int64_t lo = std::max(on, start);
            const std::int64_t hi = std::min(end, start + real - 1);
            for (std::int64_t a = lo; a <= hi; ++a)
                labels[static_cast<std::size_t>(a - start)] = 1.0;
        }
        batch.slices.push_back(std::move(raw));
        batch.mask.push_back(std::move(mask));
        batch.point_labels.push_back(std::move(labels));
        batch.slice_labels.push_back(static_cast<int>(r.series_label));
        batch.record_ids.push_back(r.record_id);
        batch.start_offsets.push_back(start);
    }
    return batch;
}

}  // namespace mma::data
