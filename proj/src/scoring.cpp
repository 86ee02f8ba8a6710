#include "mma/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "mma/error.hpp"
#include "mma/io_util.hpp"

namespace mma::score {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

double parse_cell(const std::string& text, int line_no) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError("scoring matrix: line " + std::to_string(line_no) +
                         ": bad number '" + text + "'");
    return v;
}

const char* kOrder[3] = {"N", "AFF", "AFP"};

void check_episode_list(const std::vector<data::Episode>& eps, const char* which) {
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (eps[i].first > eps[i].second)
            throw ContractError(std::string("score_episodes: ") + which +
                                " episode with onset after end");
        if (i > 0 && eps[i].first <= eps[i - 1].second)
            throw ContractError(std::string("score_episodes: ") + which +
                                " episodes unsorted or overlapping");
    }
}

}  // namespace

void ScoringMatrix::validate() const {
    for (int c = 0; c < 3; ++c)
        if (r[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] != 1.0)
            throw ContractError("scoring matrix: diagonal must be 1.0");
}

ScoringMatrix default_matrix() {
    ScoringMatrix m;
    for (int c = 0; c < 3; ++c) m.r[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = 1.0;
    m.r[0][1] = -1.0;  // N mistaken for AFF
    m.r[1][0] = -2.0;  // AFF mistaken for N
    m.unverified_default = true;
    return m;
}

ScoringMatrix matrix_from_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(line);
            line.clear();
        } else {
            line.push_back(c);
        }
    }
    if (!line.empty()) lines.push_back(line);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() != 4)
        throw ParseError("scoring matrix: expected a header and 3 rows, got " +
                         std::to_string(lines.size()) + " lines");

    const std::vector<std::string> header = split_csv_line(lines[0]);
    if (header.size() != 4 || !header[0].empty() || header[1] != kOrder[0] ||
        header[2] != kOrder[1] || header[3] != kOrder[2])
        throw ParseError("scoring matrix: header must be ',N,AFF,AFP'");

    ScoringMatrix m;
    for (int row = 0; row < 3; ++row) {
        const std::vector<std::string> fields =
            split_csv_line(lines[static_cast<std::size_t>(row) + 1]);
        if (fields.size() != 4)
            throw ParseError("scoring matrix: line " + std::to_string(row + 2) +
                             ": expected 4 fields");
        if (fields[0] != kOrder[row])
            throw ParseError("scoring matrix: line " + std::to_string(row + 2) +
                             ": expected row label '" + kOrder[row] + "'");
        for (int col = 0; col < 3; ++col)
            m.r[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
                parse_cell(fields[static_cast<std::size_t>(col) + 1], row + 2);
    }
    for (int c = 0; c < 3; ++c)
        if (m.r[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] != 1.0)
            throw ParseError("scoring matrix: diagonal cell " + std::string(kOrder[c]) +
                             " must be 1.0");
    return m;
}

ScoringMatrix load_matrix_csv(const std::filesystem::path& path) {
    return matrix_from_csv(io::read_file(path));
}

std::string matrix_to_csv(const ScoringMatrix& matrix) {
    std::string out = ",N,AFF,AFP\n";
    for (int row = 0; row < 3; ++row) {
        out += kOrder[row];
        for (int col = 0; col < 3; ++col) {
            out += ',';
            out += fmt_double(matrix.r[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]);
        }
        out += '\n';
    }
    return out;
}

double score_classification(data::SeriesLabel truth, data::SeriesLabel pred,
                            const ScoringMatrix& matrix) {
    return matrix.r[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
}

double BeatRuler::coordinate(std::int64_t sample) const {
    if (!positions || positions->size() < 2) {
        if (beat_len < 1) throw ContractError("beat ruler: beat_len must be >= 1");
        return static_cast<double>(sample) / static_cast<double>(beat_len);
    }
    const std::vector<std::int64_t>& pos = *positions;
    for (std::size_t i = 1; i < pos.size(); ++i)
        if (pos[i] <= pos[i - 1])
            throw ContractError("beat ruler: beat positions must be strictly increasing");
    const auto it = std::upper_bound(pos.begin(), pos.end(), sample);
    const auto seg = std::clamp<std::ptrdiff_t>(it - pos.begin() - 1, 0,
                                                static_cast<std::ptrdiff_t>(pos.size()) - 2);
    const auto i = static_cast<std::size_t>(seg);
    return static_cast<double>(seg) +
           static_cast<double>(sample - pos[i]) / static_cast<double>(pos[i + 1] - pos[i]);
}

double BeatRuler::distance_beats(std::int64_t a, std::int64_t b) const {
    return std::fabs(coordinate(a) - coordinate(b));
}

namespace {

double match_boundaries(const std::vector<std::int64_t>& truth,
                        const std::vector<std::int64_t>& pred, const BeatRuler& ruler) {
    struct Candidate {
        double dist;
        std::size_t t;
        std::size_t p;
    };
    std::vector<Candidate> candidates;
    for (std::size_t t = 0; t < truth.size(); ++t)
        for (std::size_t p = 0; p < pred.size(); ++p) {
            const double d = ruler.distance_beats(truth[t], pred[p]);
            if (d <= 2.0) candidates.push_back({d, t, p});
        }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.t != b.t) return a.t < b.t;
        return a.p < b.p;
    });
    std::vector<bool> t_used(truth.size(), false), p_used(pred.size(), false);
    double total = 0.0;
    for (const Candidate& c : candidates) {
        if (t_used[c.t] || p_used[c.p]) continue;
        t_used[c.t] = true;
        p_used[c.p] = true;
        total += c.dist <= 1.0 ? 1.0 : 0.5;
    }
    return total;
}

}  // namespace

EpisodeScore score_episodes(const std::vector<data::Episode>& truth,
                            const std::vector<data::Episode>& pred,
                            const BeatRuler& ruler) {
    check_episode_list(truth, "truth");
    check_episode_list(pred, "predicted");
    std::vector<std::int64_t> t_on, t_off, p_on, p_off;
    for (const data::Episode& e : truth) {
        t_on.push_back(e.first);
        t_off.push_back(e.second);
    }
    for (const data::Episode& e : pred) {
        p_on.push_back(e.first);
        p_off.push_back(e.second);
    }
    EpisodeScore s;
    s.onsets = match_boundaries(t_on, p_on, ruler);
    s.endpoints = match_boundaries(t_off, p_off, ruler);
    s.total = s.onsets + s.endpoints;
    return s;
}

RecordScore score_record(const RecordPair& pair, const ScoringMatrix& matrix) {
    matrix.validate();
    BeatRuler ruler;
    ruler.beat_len = pair.beat_len;
    if (pair.beat_positions) ruler.positions = &*pair.beat_positions;

    RecordScore rec;
    rec.record_id = pair.record_id;
    rec.u_r = score_classification(pair.truth_label, pair.pred_label, matrix);
    rec.u_e = score_episodes(pair.truth_episodes, pair.pred_episodes, ruler).total;
    rec.m_a = static_cast<int>(pair.truth_episodes.size());
    rec.m_r = static_cast<int>(pair.pred_episodes.size());
    rec.episode_weight =
        (rec.m_a == 0 && rec.m_r == 0)
            ? 1.0
            : static_cast<double>(rec.m_a) / static_cast<double>(std::max(rec.m_r, rec.m_a));
    rec.contribution = rec.u_r + rec.episode_weight * rec.u_e;
    return rec;
}

ScoreReport score_dataset(const std::vector<RecordPair>& pairs, const ScoringMatrix& matrix) {
    if (pairs.empty()) throw ContractError("score_dataset: no records");
    ScoreReport report;
    report.matrix_unverified_default = matrix.unverified_default;
    for (const RecordPair& pair : pairs) {
        report.records.push_back(score_record(pair, matrix));
        report.u_r_mean += report.records.back().u_r;
        report.u_e_sum += report.records.back().u_e;
        report.u += report.records.back().contribution;
    }
    const auto n = static_cast<double>(pairs.size());
    report.u_r_mean /= n;
    report.u /= n;
    return report;
}

std::string report_to_csv(const ScoreReport& report) {
    std::string out;
    if (report.matrix_unverified_default)
        out += "# scoring matrix: unverified default (only the +1/-1/-2 cells are documented)\n";
    out += "record_id,u_r,u_e,m_a,m_r,episode_weight,contribution\n";
    for (const RecordScore& r : report.records) {
        out += r.record_id;
        out += ',';
        out += fmt_double(r.u_r);
        out += ',';
        out += fmt_double(r.u_e);
        out += ',';
        out += std::to_string(r.m_a);
        out += ',';
        out += std::to_string(r.m_r);
        out += ',';
        out += fmt_double(r.episode_weight);
        out += ',';
        out += fmt_double(r.contribution);
        out += '\n';
    }
    return out;
}

std::string report_to_json(const ScoreReport& report) {
    nlohmann::json j;
    j["U_r_mean"] = report.u_r_mean;
    j["U_e_sum"] = report.u_e_sum;
    j["U"] = report.u;
    j["n_records"] = report.records.size();
    j["matrix_unverified_default"] = report.matrix_unverified_default;
    return j.dump(2) + "\n";
}

}  // namespace mma::score
