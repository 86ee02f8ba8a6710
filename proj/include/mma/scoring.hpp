#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mma/signal.hpp"

namespace mma::score {

// R[truth][pred] over the class order N, AFF, AFP.
struct ScoringMatrix {
    std::array<std::array<double, 3>, 3> r{};
    // set when using the shipped default, whose cells beyond the three
    // documented ones (+1 diagonal, N->AFF -1, AFF->N -2) are unverified
    bool unverified_default = false;
    void validate() const;  // diagonal entries must all equal 1.0
};

ScoringMatrix default_matrix();
ScoringMatrix matrix_from_csv(const std::string& text);
ScoringMatrix load_matrix_csv(const std::filesystem::path& path);
std::string matrix_to_csv(const ScoringMatrix& matrix);

double score_classification(data::SeriesLabel truth, data::SeriesLabel pred,
                            const ScoringMatrix& matrix);

// Converts sample indices to fractional beat coordinates: linear
// interpolation over beat_positions when present (edge segments
// extrapolate), otherwise a fixed beat_len samples per beat.
struct BeatRuler {
    int beat_len = 150;
    const std::vector<std::int64_t>* positions = nullptr;
    double coordinate(std::int64_t sample) const;
    double distance_beats(std::int64_t a, std::int64_t b) const;
};

struct EpisodeScore {
    double onsets = 0.0;
    double endpoints = 0.0;
    double total = 0.0;
};

// Onsets and endpoints scored independently with greedy nearest-first
// one-to-one matching; a matched boundary earns +1 within one beat and
// +0.5 within two.
EpisodeScore score_episodes(const std::vector<data::Episode>& truth,
                            const std::vector<data::Episode>& pred,
                            const BeatRuler& ruler);

struct RecordScore {
    std::string record_id;
    double u_r = 0.0;
    double u_e = 0.0;
    int m_a = 0;  // annotated episodes
    int m_r = 0;  // recognized episodes
    double episode_weight = 0.0;  // m_a / max(m_r, m_a); 1 when both are 0
    double contribution = 0.0;    // u_r + episode_weight * u_e
};

struct RecordPair {
    std::string record_id;
    data::SeriesLabel truth_label = data::SeriesLabel::N;
    std::vector<data::Episode> truth_episodes;
    data::SeriesLabel pred_label = data::SeriesLabel::N;
    std::vector<data::Episode> pred_episodes;
    int beat_len = 150;
    std::optional<std::vector<std::int64_t>> beat_positions;
};

RecordScore score_record(const RecordPair& pair, const ScoringMatrix& matrix);

struct ScoreReport {
    std::vector<RecordScore> records;
    double u_r_mean = 0.0;
    double u_e_sum = 0.0;
    double u = 0.0;  // mean of contributions
    bool matrix_unverified_default = false;
};

ScoreReport score_dataset(const std::vector<RecordPair>& pairs,
                          const ScoringMatrix& matrix);

std::string report_to_csv(const ScoreReport& report);
std::string report_to_json(const ScoreReport& report);

}  // namespace mma::score
