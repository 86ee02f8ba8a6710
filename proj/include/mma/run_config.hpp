#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "mma/dataset.hpp"
#include "mma/network.hpp"
#include "mma/postprocess.hpp"
#include "mma/synth.hpp"
#include "mma/train.hpp"

namespace mma::cfg {

// Flat INI text: `[section]` headers, `key = value` lines, `#`/`;` comments.
// Keys are addressed as "section.key".
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_ini(const std::string& text);
KeyValues load_config_file(const std::filesystem::path& path);

// Command-line override of the form "section.key=value".
void apply_override(KeyValues& values, const std::string& assignment);

// Everything a pipeline run needs, fully resolved. The per-module seeds
// default to the global one, so a single --seed reproduces the whole run.
struct RunConfig {
    net::ModelConfig model;
    net::TrainSchedule schedule;
    net::TrainMode mode = net::TrainMode::joint;
    post::BlendPolicy blend;
    post::MlpOptions proportion;
    data::SynthSpec synth;
    data::SplitRatios split;
    std::uint64_t seed = 1;
    std::uint64_t split_seed = 1;
    int threads = 0;  // 0 keeps the runtime default
    std::string data_manifest;
    std::string matrix_path;
    std::string init_from;
    std::string checkpoint;
    std::string pred_dir;
    bool attention_dump = false;
    std::string out_dir;

    void validate() const;
};

// Defaults, then file values; unknown keys or unparseable values throw
// SpecError. resolve(parse_ini(to_ini(rc))) reproduces rc.
RunConfig resolve(const KeyValues& values);
std::string to_ini(const RunConfig& cfg);

// Writes the resolved snapshot every command leaves in its output directory.
void write_snapshot(const std::filesystem::path& out_dir, const RunConfig& cfg);

}  // namespace mma::cfg
