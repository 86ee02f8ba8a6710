#include "mma/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "mma/error.hpp"
#include "mma/io_util.hpp"
#include "mma/rng.hpp"

namespace mma::data {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& file, std::size_t line_no, std::string_view text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(file + ":" + std::to_string(line_no) + ": bad number '" +
                         std::string(text) + "'");
    }
    return v;
}

// Splits one CSV line on commas; no quoting (ids and paths exclude commas).
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::vector<std::string> read_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos) nl = content.size();
        std::string line = content.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = nl + 1;
    }
    return lines;
}

}  // namespace

std::vector<double> load_signal(const std::filesystem::path& path, int* sampling_rate) {
    const std::string content = io::read_file(path);
    if (content.size() >= 4 && content.compare(0, 4, "MMSG") == 0) {
        io::BinReader r{content, "signal " + path.string()};
        r.pos = 4;
        const std::uint32_t rate = r.u32();
        const std::uint64_t count = r.u64();
        r.need(count * 8);
        std::vector<double> samples(count);
        for (auto& v : samples) v = r.f64();
        if (r.pos != content.size())
            throw ParseError("signal " + path.string() + ": trailing bytes at " +
                             std::to_string(r.pos));
        if (sampling_rate) *sampling_rate = static_cast<int>(rate);
        return samples;
    }
    std::vector<double> samples;
    const auto lines = read_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        samples.push_back(parse_double(path.string(), i + 1, lines[i]));
    }
    if (sampling_rate) *sampling_rate = kDefaultSamplingRate;
    return samples;
}

void save_signal_csv(const std::filesystem::path& path, const std::vector<double>& samples) {
    std::string out;
    out.reserve(samples.size() * 12);
    for (double v : samples) {
        out += fmt_double(v);
        out += '\n';
    }
    io::atomic_write(path, out);
}

void save_signal_binary(const std::filesystem::path& path, int sampling_rate,
                        const std::vector<double>& samples) {
    std::string out = "MMSG";
    io::put_u32(out, static_cast<std::uint32_t>(sampling_rate));
    io::put_u64(out, samples.size());
    for (double v : samples) io::put_f64(out, v);
    io::atomic_write(path, out);
}

Annotation load_annotation(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("annotation " + path.string() + ": " + e.what());
    }
    Annotation ann;
    try {
        if (!j.is_object() || !j.contains("episodes"))
            throw ParseError("annotation " + path.string() + ": missing 'episodes'");
        for (const auto& ep : j.at("episodes")) {
            if (!ep.is_array() || ep.size() != 2)
                throw ParseError("annotation " + path.string() +
                                 ": episode must be [onset,end]");
            ann.episodes.emplace_back(ep[0].get<std::int64_t>(), ep[1].get<std::int64_t>());
        }
        if (j.contains("beat_positions") && !j.at("beat_positions").is_null()) {
            ann.beat_positions = j.at("beat_positions").get<std::vector<std::int64_t>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("annotation " + path.string() + ": " + e.what());
    }
    return ann;
}

void save_annotation(const std::filesystem::path& path, const Annotation& ann) {
    nlohmann::json j;
    j["episodes"] = nlohmann::json::array();
    for (const auto& [on, end] : ann.episodes) j["episodes"].push_back({on, end});
    if (ann.beat_positions)
        j["beat_positions"] = *ann.beat_positions;
    else
        j["beat_positions"] = nullptr;
    io::atomic_write(path, j.dump(2) + "\n");
}

std::vector<SignalRecord> load_records(const std::filesystem::path& manifest_path,
                                       int beat_len) {
    const auto lines = read_lines(io::read_file(manifest_path));
    if (lines.empty() || lines[0] != "record_id,signal_path,label,annotation_path")
        throw ParseError(manifest_path.string() +
                         ":1: expected header record_id,signal_path,label,annotation_path");
    const auto base = manifest_path.parent_path();

    std::vector<SignalRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv(lines[i]);
        if (fields.size() != 4)
            throw ParseError(manifest_path.string() + ":" + std::to_string(i + 1) +
                             ": expected 4 fields, got " + std::to_string(fields.size()));
        SignalRecord rec;
        rec.record_id = fields[0];
        try {
            rec.series_label = label_from_string(fields[2]);
        } catch (const LabelError& e) {
            throw ParseError(manifest_path.string() + ":" + std::to_string(i + 1) + ": " +
                             e.what());
        }
        rec.samples = load_signal(base / fields[1], &rec.sampling_rate);
        Annotation ann = load_annotation(base / fields[3]);
        rec.episodes = std::move(ann.episodes);
        rec.beat_positions = std::move(ann.beat_positions);
        validate_record(rec, beat_len);
        records.push_back(std::move(rec));
    }
    return records;
}

std::filesystem::path save_corpus(const std::filesystem::path& dir,
                                  const std::vector<SignalRecord>& records,
                                  bool binary_signals) {
    io::ensure_dir(dir);
    io::ensure_dir(dir / "signals");
    io::ensure_dir(dir / "annotations");

    std::string manifest = "record_id,signal_path,label,annotation_path\n";
    for (const auto& rec : records) {
        const std::string sig_name =
            std::string("signals/") + rec.record_id + (binary_signals ? ".bin" : ".csv");
        const std::string ann_name = "annotations/" + rec.record_id + ".json";
        if (binary_signals)
            save_signal_binary(dir / sig_name, rec.sampling_rate, rec.samples);
        else
            save_signal_csv(dir / sig_name, rec.samples);
        save_annotation(dir / ann_name, {rec.episodes, rec.beat_positions});
        manifest += rec.record_id + "," + sig_name + "," + label_name(rec.series_label) +
                    "," + ann_name + "\n";
    }
    const auto manifest_path = dir / "manifest.csv";
    io::atomic_write(manifest_path, manifest);
    return manifest_path;
}

std::array<std::vector<SignalRecord>, 3> split_dataset(
    const std::vector<SignalRecord>& records, const SplitRatios& ratios,
    std::uint64_t seed) {
    const double r[3] = {ratios.train, ratios.val, ratios.test};
    double sum = r[0] + r[1] + r[2];
    if (r[0] <= 0 || r[1] <= 0 || r[2] <= 0 || std::abs(sum - 1.0) > 1e-9)
        throw ContractError("split_dataset: ratios must be positive and sum to 1");

    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < records.size(); ++i)
        by_class[static_cast<std::size_t>(records[i].series_label)].push_back(i);

    std::array<std::vector<SignalRecord>, 3> splits;
    for (int c = 0; c < kNumClasses; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.empty()) continue;
        if (idx.size() < 3)
            throw StratificationError("class " + label_name(static_cast<SeriesLabel>(c)) +
                                      " has " + std::to_string(idx.size()) +
                                      " records, fewer than the 3 splits");
        // deterministic per-class shuffle
        RngStream rng = RngStream::derive(seed, 0x5b1700 + static_cast<std::uint64_t>(c));
        for (std::size_t i = idx.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(idx[i - 1], idx[j]);
        }
        // largest-remainder allocation of counts
        const auto n = static_cast<double>(idx.size());
        std::size_t counts[3];
        double remainder[3];
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double ideal = r[s] * n;
            counts[s] = static_cast<std::size_t>(ideal);
            remainder[s] = ideal - static_cast<double>(counts[s]);
            assigned += counts[s];
        }
        std::array<int, 3> order = {0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
            return a < b;
        });
        for (std::size_t leftover = idx.size() - assigned, k = 0; k < leftover; ++k)
            ++counts[order[k % 3]];

        std::size_t cursor = 0;
        for (int s = 0; s < 3; ++s)
            for (std::size_t k = 0; k < counts[s]; ++k)
                splits[static_cast<std::size_t>(s)].push_back(records[idx[cursor++]]);
    }
    return splits;
}

}  // namespace mma::data
