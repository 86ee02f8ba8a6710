#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mma/signal.hpp"

namespace mma::data {

// Signal file formats: CSV (one amplitude per line, rate assumed 200 Hz) or
// binary (magic "MMSG", u32 sampling rate, u64 count, f64 little-endian
// samples). The loader sniffs the magic.
std::vector<double> load_signal(const std::filesystem::path& path, int* sampling_rate);
void save_signal_csv(const std::filesystem::path& path, const std::vector<double>& samples);
void save_signal_binary(const std::filesystem::path& path, int sampling_rate,
                        const std::vector<double>& samples);

struct Annotation {
    std::vector<Episode> episodes;
    std::optional<std::vector<std::int64_t>> beat_positions;
};

Annotation load_annotation(const std::filesystem::path& path);
void save_annotation(const std::filesystem::path& path, const Annotation& ann);

// Manifest CSV: header `record_id,signal_path,label,annotation_path`,
// label in {N,AFF,AFP}; paths resolved relative to the manifest directory.
// Every record is validated before being returned.
std::vector<SignalRecord> load_records(const std::filesystem::path& manifest_path,
                                       int beat_len);

// Writes manifest.csv plus signals/<id> and annotations/<id>.json under dir.
// Returns the manifest path.
std::filesystem::path save_corpus(const std::filesystem::path& dir,
                                  const std::vector<SignalRecord>& records,
                                  bool binary_signals = false);

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

// Stratified three-way split: per class, deterministic shuffle then
// largest-remainder allocation, so each split's class counts sit within one
// record of the exact proportional ideal. A class that is present but has
// fewer records than splits cannot be stratified and is rejected.
std::array<std::vector<SignalRecord>, 3> split_dataset(
    const std::vector<SignalRecord>& records, const SplitRatios& ratios,
    std::uint64_t seed);

}  // namespace mma::data
