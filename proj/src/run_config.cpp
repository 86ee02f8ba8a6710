#include "mma/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <utility>

#include "mma/error.hpp"
#include "mma/io_util.hpp"

namespace mma::cfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Pops known keys off a copy of the map; whatever is left is a typo.
class Consumer {
  public:
    explicit Consumer(KeyValues values) : kv_(std::move(values)) {}

    bool take(const std::string& key, std::string* out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return false;
        *out = it->second;
        kv_.erase(it);
        return true;
    }

    template <typename T>
    void take_number(const std::string& key, T* out) {
        std::string text;
        if (!take(key, &text)) return;
        T v{};
        const char* end = text.data() + text.size();
        auto [p, ec] = std::from_chars(text.data(), end, v);
        if (ec != std::errc() || p != end)
            throw SpecError("config: bad value for '" + key + "': '" + text + "'");
        *out = v;
    }

    void take_bool(const std::string& key, bool* out) {
        std::string text;
        if (!take(key, &text)) return;
        if (text == "true" || text == "1")
            *out = true;
        else if (text == "false" || text == "0")
            *out = false;
        else
            throw SpecError("config: bad boolean for '" + key + "': '" + text + "'");
    }

    void finish() const {
        if (kv_.empty()) return;
        throw SpecError("config: unknown key '" + kv_.begin()->first + "'");
    }

  private:
    KeyValues kv_;
};

}  // namespace

KeyValues parse_ini(const std::string& text) {
    KeyValues out;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ParseError("config line " + std::to_string(line_no) +
                                 ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ParseError("config line " + std::to_string(line_no) +
                                 ": empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) +
                             ": expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ParseError("config line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ParseError("config line " + std::to_string(line_no) + ": key '" +
                             key + "' appears before any [section]");
        out[section + "." + key] = trim(line.substr(eq + 1));
    }
    return out;
}

KeyValues load_config_file(const std::filesystem::path& path) {
    if (path.empty()) return {};
    return parse_ini(io::read_file(path));
}

void apply_override(KeyValues& values, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    const std::size_t dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq ||
        dot == 0 || dot + 1 == eq)
        throw SpecError("override must look like section.key=value: '" + assignment +
                        "'");
    values[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

void RunConfig::validate() const {
    try {
        model.validate();
        blend.validate();
    } catch (const ContractError& e) {
        throw SpecError(std::string("config: ") + e.what());
    }
    if (proportion.epochs < 0) throw SpecError("config: pmlp.epochs must be >= 0");
    if (!(proportion.lr > 0.0)) throw SpecError("config: pmlp.lr must be > 0");
    if (schedule.epochs < 0) throw SpecError("config: train.epochs must be >= 0");
    if (schedule.batch_size < 1) throw SpecError("config: train.batch_size must be >= 1");
    if (schedule.patience < 1) throw SpecError("config: train.patience must be >= 1");
    if (!(schedule.lr >= 0.0)) throw SpecError("config: train.lr must be >= 0");
    if (threads < 0) throw SpecError("config: run.threads must be >= 0");
    if (split.train < 0 || split.val < 0 || split.test < 0)
        throw SpecError("config: split ratios must be nonnegative");
}

RunConfig resolve(const KeyValues& values) {
    Consumer kv(values);
    RunConfig rc;

    kv.take_number("run.seed", &rc.seed);
    kv.take_number("run.threads", &rc.threads);

    kv.take("paths.data", &rc.data_manifest);
    kv.take("paths.matrix", &rc.matrix_path);
    kv.take("paths.init_from", &rc.init_from);
    kv.take("paths.checkpoint", &rc.checkpoint);
    kv.take("paths.pred", &rc.pred_dir);
    kv.take("paths.out", &rc.out_dir);

    kv.take_number("model.d_proj", &rc.model.d_proj);
    kv.take_number("model.d_hidden", &rc.model.d_hidden);
    kv.take_number("model.beat_len", &rc.model.beat_len);
    kv.take_number("model.l_slice", &rc.model.l_slice);
    kv.take_number("model.n_classes", &rc.model.n_classes);
    kv.take_number("model.dropout_rate", &rc.model.dropout_rate);
    kv.take_number("model.w_d", &rc.model.w_d);
    kv.take_number("model.w_l", &rc.model.w_l);
    kv.take_bool("model.concat_slice_features", &rc.model.concat_slice_features_to_head2);
    std::string scheme;
    if (kv.take("model.init_scheme", &scheme)) {
        if (scheme == "glorot")
            rc.model.init_scheme = InitScheme::glorot;
        else if (scheme == "he")
            rc.model.init_scheme = InitScheme::he;
        else
            throw SpecError("config: init_scheme must be glorot or he, got '" + scheme +
                            "'");
    }

    kv.take_number("train.epochs", &rc.schedule.epochs);
    kv.take_number("train.batch_size", &rc.schedule.batch_size);
    kv.take_number("train.patience", &rc.schedule.patience);
    kv.take_number("train.lr", &rc.schedule.lr);
    std::string mode;
    if (kv.take("train.mode", &mode)) {
        try {
            rc.mode = net::train_mode_from_string(mode);
        } catch (const ContractError& e) {
            throw SpecError(std::string("config: ") + e.what());
        }
    }

    kv.take_number("blend.theta_normal", &rc.blend.theta_normal);
    kv.take_number("blend.theta_abnormal", &rc.blend.theta_abnormal);
    kv.take_number("blend.min_episode_samples", &rc.blend.min_episode_samples);
    kv.take_number("blend.smoothing_window", &rc.blend.smoothing_window);

    kv.take_number("pmlp.epochs", &rc.proportion.epochs);
    kv.take_number("pmlp.lr", &rc.proportion.lr);

    kv.take_number("split.train", &rc.split.train);
    kv.take_number("split.val", &rc.split.val);
    kv.take_number("split.test", &rc.split.test);

    kv.take_number("synth.count", &rc.synth.count);
    kv.take_number("synth.mix_n", &rc.synth.mix[0]);
    kv.take_number("synth.mix_aff", &rc.synth.mix[1]);
    kv.take_number("synth.mix_afp", &rc.synth.mix[2]);
    kv.take_number("synth.min_len", &rc.synth.min_len);
    kv.take_number("synth.max_len", &rc.synth.max_len);
    kv.take_number("synth.sampling_rate", &rc.synth.sampling_rate);
    kv.take_number("synth.beat_len", &rc.synth.beat_len);
    kv.take_number("synth.bpm_jitter", &rc.synth.bpm_jitter);
    kv.take_number("synth.rate_perturbation", &rc.synth.rate_perturbation);
    kv.take_number("synth.af_rate_factor", &rc.synth.af_rate_factor);
    kv.take_number("synth.irregularity_amplitude", &rc.synth.irregularity_amplitude);
    kv.take_number("synth.fibrillation_hz", &rc.synth.fibrillation_hz);
    kv.take_number("synth.noise_std", &rc.synth.noise_std);
    kv.take_number("synth.min_segment_beats", &rc.synth.min_segment_beats);
    kv.take_number("synth.max_segment_beats", &rc.synth.max_segment_beats);

    kv.take_bool("predict.attention_dump", &rc.attention_dump);

    // per-module seeds follow the global one unless pinned in the file
    rc.schedule.seed = rc.seed;
    rc.synth.seed = rc.seed;
    rc.proportion.seed = rc.seed;
    rc.split_seed = rc.seed;
    kv.take_number("train.seed", &rc.schedule.seed);
    kv.take_number("synth.seed", &rc.synth.seed);
    kv.take_number("pmlp.seed", &rc.proportion.seed);
    kv.take_number("split.seed", &rc.split_seed);

    kv.finish();
    rc.validate();
    return rc;
}

std::string to_ini(const RunConfig& rc) {
    std::string s;
    s += "[run]\n";
    s += "seed = " + std::to_string(rc.seed) + "\n";
    s += "threads = " + std::to_string(rc.threads) + "\n";
    s += "\n[paths]\n";
    s += "data = " + rc.data_manifest + "\n";
    s += "matrix = " + rc.matrix_path + "\n";
    s += "init_from = " + rc.init_from + "\n";
    s += "checkpoint = " + rc.checkpoint + "\n";
    s += "pred = " + rc.pred_dir + "\n";
    s += "out = " + rc.out_dir + "\n";
    s += "\n[model]\n";
    s += "d_proj = " + std::to_string(rc.model.d_proj) + "\n";
    s += "d_hidden = " + std::to_string(rc.model.d_hidden) + "\n";
    s += "beat_len = " + std::to_string(rc.model.beat_len) + "\n";
    s += "l_slice = " + std::to_string(rc.model.l_slice) + "\n";
    s += "n_classes = " + std::to_string(rc.model.n_classes) + "\n";
    s += "dropout_rate = " + fmt_double(rc.model.dropout_rate) + "\n";
    s += "w_d = " + fmt_double(rc.model.w_d) + "\n";
    s += "w_l = " + fmt_double(rc.model.w_l) + "\n";
    s += std::string("concat_slice_features = ") +
         (rc.model.concat_slice_features_to_head2 ? "true" : "false") + "\n";
    s += std::string("init_scheme = ") +
         (rc.model.init_scheme == InitScheme::glorot ? "glorot" : "he") + "\n";
    s += "\n[train]\n";
    s += "mode = " + net::train_mode_name(rc.mode) + "\n";
    s += "epochs = " + std::to_string(rc.schedule.epochs) + "\n";
    s += "batch_size = " + std::to_string(rc.schedule.batch_size) + "\n";
    s += "patience = " + std::to_string(rc.schedule.patience) + "\n";
    s += "lr = " + fmt_double(rc.schedule.lr) + "\n";
    s += "seed = " + std::to_string(rc.schedule.seed) + "\n";
    s += "\n[blend]\n";
    s += "theta_normal = " + fmt_double(rc.blend.theta_normal) + "\n";
    s += "theta_abnormal = " + fmt_double(rc.blend.theta_abnormal) + "\n";
    s += "min_episode_samples = " + std::to_string(rc.blend.min_episode_samples) + "\n";
    s += "smoothing_window = " + std::to_string(rc.blend.smoothing_window) + "\n";
    s += "\n[pmlp]\n";
    s += "epochs = " + std::to_string(rc.proportion.epochs) + "\n";
    s += "lr = " + fmt_double(rc.proportion.lr) + "\n";
    s += "seed = " + std::to_string(rc.proportion.seed) + "\n";
    s += "\n[split]\n";
    s += "train = " + fmt_double(rc.split.train) + "\n";
    s += "val = " + fmt_double(rc.split.val) + "\n";
    s += "test = " + fmt_double(rc.split.test) + "\n";
    s += "seed = " + std::to_string(rc.split_seed) + "\n";
    s += "\n[synth]\n";
    s += "count = " + std::to_string(rc.synth.count) + "\n";
    s += "mix_n = " + fmt_double(rc.synth.mix[0]) + "\n";
    s += "mix_aff = " + fmt_double(rc.synth.mix[1]) + "\n";
    s += "mix_afp = " + fmt_double(rc.synth.mix[2]) + "\n";
    s += "min_len = " + std::to_string(rc.synth.min_len) + "\n";
    s += "max_len = " + std::to_string(rc.synth.max_len) + "\n";
    s += "sampling_rate = " + std::to_string(rc.synth.sampling_rate) + "\n";
    s += "beat_len = " + std::to_string(rc.synth.beat_len) + "\n";
    s += "bpm_jitter = " + fmt_double(rc.synth.bpm_jitter) + "\n";
    s += "rate_perturbation = " + fmt_double(rc.synth.rate_perturbation) + "\n";
    s += "af_rate_factor = " + fmt_double(rc.synth.af_rate_factor) + "\n";
    s += "irregularity_amplitude = " + fmt_double(rc.synth.irregularity_amplitude) + "\n";
    s += "fibrillation_hz = " + fmt_double(rc.synth.fibrillation_hz) + "\n";
    s += "noise_std = " + fmt_double(rc.synth.noise_std) + "\n";
    s += "min_segment_beats = " + std::to_string(rc.synth.min_segment_beats) + "\n";
    s += "max_segment_beats = " + std::to_string(rc.synth.max_segment_beats) + "\n";
    s += "seed = " + std::to_string(rc.synth.seed) + "\n";
    s += "\n[predict]\n";
    s += std::string("attention_dump = ") + (rc.attention_dump ? "true" : "false") + "\n";
    return s;
}

void write_snapshot(const std::filesystem::path& out_dir, const RunConfig& cfg) {
    io::ensure_dir(out_dir);
    io::atomic_write(out_dir / "resolved_config.ini", to_ini(cfg));
}

}  // namespace mma::cfg
