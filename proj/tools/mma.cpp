#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mma/checkpoint.hpp"
#include "mma/dataset.hpp"
#include "mma/error.hpp"
#include "mma/io_util.hpp"
#include "mma/log.hpp"
#include "mma/network.hpp"
#include "mma/postprocess.hpp"
#include "mma/run_config.hpp"
#include "mma/scoring.hpp"
#include "mma/synth.hpp"
#include "mma/train.hpp"

namespace {

using namespace mma;

struct ExitCode {
    int code;
};

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw SpecError(message);
}

struct CommonArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string seed;
    std::string out;
    std::string threads;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--config", a.config, "INI config file");
    sub->add_option("--set", a.sets, "override a config key, section.key=value");
    sub->add_option("--seed", a.seed, "global RNG seed");
    sub->add_option("--out", a.out, "output directory");
    sub->add_option("--threads", a.threads, "worker threads (0 = runtime default)");
}

cfg::RunConfig build_config(const CommonArgs& a, const cfg::KeyValues& flag_kv) {
    cfg::KeyValues kv;
    try {
        kv = cfg::load_config_file(a.config);
    } catch (const ParseError& e) {
        throw SpecError(e.what());
    }
    for (const std::string& s : a.sets) cfg::apply_override(kv, s);
    if (!a.seed.empty()) kv["run.seed"] = a.seed;
    if (!a.threads.empty()) kv["run.threads"] = a.threads;
    if (!a.out.empty()) kv["paths.out"] = a.out;
    for (const auto& [k, v] : flag_kv) kv[k] = v;
    cfg::RunConfig rc = cfg::resolve(kv);
#ifdef _OPENMP
    if (rc.threads > 0) omp_set_num_threads(rc.threads);
#endif
    return rc;
}

int argmax3(const Tensor& probs) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.size()); ++c)
        if (probs.value()[static_cast<std::size_t>(c)] >
            probs.value()[static_cast<std::size_t>(best)])
            best = c;
    return best;
}

data::SliceBatch segment_all(const std::vector<data::SignalRecord>& records,
                             const net::ModelConfig& mcfg) {
    data::SliceBatch all;
    all.l_slice = mcfg.l_slice;
    for (const data::SignalRecord& rec : records)
        all.append(data::segment(rec, mcfg.l_slice, mcfg.beat_len));
    return all;
}

// Checkpoint layout: model tensors (net1./net2. prefixed in independent mode)
// plus the proportion classifier under pmlp.*.
struct NetViews {
    ParamStore net1;  // drives Head 1
    ParamStore net2;  // drives Head 2 (same store unless independent)
    bool independent = false;
};

NetViews split_nets(const ParamStore& full) {
    ParamStore model;
    for (const auto& [name, t] : full.entries())
        if (name.rfind("pmlp.", 0) != 0) model.add(name, t);
    NetViews v;
    v.independent = model.contains("net1.head1.w");
    if (v.independent) {
        v.net1 = model.with_prefix_stripped("net1.");
        v.net2 = model.with_prefix_stripped("net2.");
    } else {
        v.net1 = model;
        v.net2 = model;
    }
    return v;
}

void check_shapes(const net::ModelConfig& mcfg, const NetViews& views) {
    net::build_zero_params(mcfg).load_values_from(views.net1);
    if (views.independent) net::build_zero_params(mcfg).load_values_from(views.net2);
}

post::ProportionMlp extract_pmlp(const ParamStore& full) {
    const ParamStore stored = full.with_prefix_stripped("pmlp.");
    if (stored.size() == 0)
        throw CheckpointMismatchError(
            "checkpoint carries no proportion classifier (pmlp.*)");
    post::ProportionMlp mlp = post::zero_proportion_mlp();
    mlp.params.load_values_from(stored);
    return mlp;
}

post::ProportionVector slice_proportions(const data::SignalRecord& rec,
                                         ParamStore& head1_params,
                                         const net::ModelConfig& mcfg) {
    const data::SliceBatch batch = data::segment(rec, mcfg.l_slice, mcfg.beat_len);
    std::array<int, 3> counts{};
    RngStream unused(0);
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto input = data::normalize(batch.slices[s], batch.mask[s]);
        Tape tape;
        const net::ForwardOutput out = net::forward(tape, input, batch.mask[s], head1_params,
                                                    mcfg, net::RunMode::infer, unused);
        ++counts[static_cast<std::size_t>(argmax3(out.slice_probs))];
    }
    post::ProportionVector p;
    for (int c = 0; c < 3; ++c)
        p.p[static_cast<std::size_t>(c)] =
            counts[static_cast<std::size_t>(c)] / static_cast<double>(batch.size());
    return p;
}

// --- train -----------------------------------------------------------------

void run_training(const cfg::RunConfig& rc, const std::vector<data::SignalRecord>& train_recs,
                  const std::vector<data::SignalRecord>& val_recs) {
    const data::SliceBatch train_b = segment_all(train_recs, rc.model);
    const data::SliceBatch val_b = segment_all(val_recs, rc.model);
    log::info("training on " + std::to_string(train_b.size()) + " slices, validating on " +
              std::to_string(val_b.size()));

    std::optional<ParamStore> init;
    if (!rc.init_from.empty()) {
        const ParamStore loaded = load_checkpoint(rc.init_from);
        ParamStore model_only;
        for (const auto& [name, t] : loaded.entries())
            if (name.rfind("pmlp.", 0) != 0) model_only.add(name, t);
        init = std::move(model_only);
    }
    net::TrainResult result = net::train(train_b, val_b, rc.model, rc.mode, rc.schedule,
                                         init ? &*init : nullptr);

    NetViews views = split_nets(result.params);
    std::vector<post::ProportionVector> inputs;
    std::vector<data::SeriesLabel> labels;
    for (const data::SignalRecord& rec : train_recs) {
        inputs.push_back(slice_proportions(rec, views.net1, rc.model));
        labels.push_back(rec.series_label);
    }
    const post::ProportionMlp mlp = post::proportion_mlp_train(inputs, labels, rc.proportion);

    ParamStore full = result.params.clone();
    for (const auto& [name, t] : mlp.params.entries()) full.add("pmlp." + name, t);

    const std::filesystem::path dir(rc.out_dir);
    io::ensure_dir(dir);
    save_checkpoint(dir / "model.ckpt", full);
    io::atomic_write(dir / "model.ckpt.json", net::config_to_json(rc.model));
    std::string hist = "epoch,phase,train_loss,val_loss,train_acc,val_acc,best_val\n";
    for (const net::EpochStats& s : result.history)
        hist += std::to_string(s.epoch) + "," + s.phase + "," + fmt_double(s.train_loss) +
                "," + fmt_double(s.val_loss) + "," + fmt_double(s.train_acc) + "," +
                fmt_double(s.val_acc) + "," + fmt_double(s.best_val) + "\n";
    io::atomic_write(dir / "history.csv", hist);
    cfg::write_snapshot(dir, rc);
    if (!result.history.empty())
        log::info("best val loss " + std::to_string(result.history.back().best_val) +
                  " after " + std::to_string(result.history.size()) + " epochs");
}

int cmd_train(const cfg::RunConfig& rc) {
    require(!rc.out_dir.empty(), "train: --out is required");
    require(!rc.data_manifest.empty(), "train: --data (paths.data) is required");
    const auto records = data::load_records(rc.data_manifest, rc.model.beat_len);
    const auto splits = data::split_dataset(records, rc.split, rc.split_seed);
    log::info("split " + std::to_string(splits[0].size()) + "/" +
              std::to_string(splits[1].size()) + "/" + std::to_string(splits[2].size()) +
              " records");
    run_training(rc, splits[0], splits[1]);
    return 0;
}

// --- predict ---------------------------------------------------------------

struct RecordPrediction {
    post::Prediction prediction;
    std::string attention_csv;
};

RecordPrediction predict_record(const data::SignalRecord& rec, NetViews& views,
                                const net::ModelConfig& mcfg, const post::ProportionMlp& mlp,
                                const post::BlendPolicy& policy, bool attention) {
    const data::SliceBatch batch = data::segment(rec, mcfg.l_slice, mcfg.beat_len);
    const int M = mcfg.beats();
    const int T = mcfg.beat_len;
    const int L = mcfg.l_slice;
    std::array<int, 3> counts{};
    std::vector<double> points(rec.samples.size(), 0.0);
    std::vector<std::string> alpha_blocks(attention ? batch.size() : 0);
    RngStream unused(0);

    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto input = data::normalize(batch.slices[s], batch.mask[s]);
        Tape tape1;
        const net::ForwardOutput out1 = net::forward(tape1, input, batch.mask[s], views.net1,
                                                     mcfg, net::RunMode::infer, unused);
        ++counts[static_cast<std::size_t>(argmax3(out1.slice_probs))];
        Tape tape2;
        const net::ForwardOutput out2 =
            views.independent ? net::forward(tape2, input, batch.mask[s], views.net2, mcfg,
                                             net::RunMode::infer, unused)
                              : out1;
        for (std::size_t p = 0; p < batch.mask[s].size(); ++p)
            if (batch.mask[s][p])
                points[static_cast<std::size_t>(batch.start_offsets[s]) + p] =
                    out2.point_probs.value()[p];
        if (attention) {
            std::string& block = alpha_blocks[s];
            const auto& am = out2.slice_attention.value();
            const auto& amt = out2.beat_attention.value();
            for (int m = 0; m < M; ++m)
                block += std::to_string(s) + ",alpha_m," + std::to_string(m) + ",-1," +
                         fmt_double(am[static_cast<std::size_t>(m)]) + "\n";
            for (int m = 0; m < M; ++m)
                for (int t = 0; t < T; ++t)
                    block += std::to_string(s) + ",alpha_mt," + std::to_string(m) + "," +
                             std::to_string(t) + "," +
                             fmt_double(amt[static_cast<std::size_t>(m * T + t)]) + "\n";
        }
    }

    const std::vector<double> smoothed = post::smooth(points, policy.smoothing_window);
    post::ProportionVector prop;
    for (int c = 0; c < 3; ++c)
        prop.p[static_cast<std::size_t>(c)] =
            counts[static_cast<std::size_t>(c)] / static_cast<double>(batch.size());
    const data::SeriesLabel head1_label = post::proportion_mlp_apply(mlp, prop);
    const post::BlendResult blended = post::blend(head1_label, smoothed, policy);

    RecordPrediction rp;
    rp.prediction = {rec.record_id, blended.label, blended.episodes};
    if (attention) {
        std::string csv = "slice,kind,i,j,value\n";
        for (std::size_t s = 0; s < batch.size(); ++s) {
            csv += alpha_blocks[s];
            for (int p = 0; p < L; ++p) {
                const std::size_t abs_i =
                    static_cast<std::size_t>(batch.start_offsets[s]) +
                    static_cast<std::size_t>(p);
                const double v =
                    batch.mask[s][static_cast<std::size_t>(p)] ? smoothed[abs_i] : 0.0;
                csv += std::to_string(s) + ",point_prob," + std::to_string(p) + ",-1," +
                       fmt_double(v) + "\n";
            }
        }
        for (const auto& [a, b] : rp.prediction.episodes)
            csv += "-1,pred_boundary," + std::to_string(a) + "," + std::to_string(b) + ",0\n";
        for (const auto& [a, b] : rec.episodes)
            csv += "-1,true_boundary," + std::to_string(a) + "," + std::to_string(b) + ",0\n";
        rp.attention_csv = std::move(csv);
    }
    return rp;
}

int cmd_predict(const cfg::RunConfig& rc) {
    require(!rc.out_dir.empty(), "predict: --out is required");
    require(!rc.data_manifest.empty(), "predict: --data (paths.data) is required");
    require(!rc.checkpoint.empty(), "predict: --checkpoint (paths.checkpoint) is required");

    const ParamStore full = load_checkpoint(rc.checkpoint);
    const std::filesystem::path sidecar(rc.checkpoint + ".json");
    if (!std::filesystem::exists(sidecar))
        throw CheckpointMismatchError("missing config sidecar " + sidecar.string());
    const net::ModelConfig mcfg = net::config_from_json(io::read_file(sidecar));
    NetViews views = split_nets(full);
    check_shapes(mcfg, views);
    const post::ProportionMlp mlp = extract_pmlp(full);

    const auto records = data::load_records(rc.data_manifest, mcfg.beat_len);
    const std::filesystem::path dir(rc.out_dir);
    io::ensure_dir(dir / "predictions");
    if (rc.attention_dump) io::ensure_dir(dir / "attention");
    for (const data::SignalRecord& rec : records) {
        const RecordPrediction rp =
            predict_record(rec, views, mcfg, mlp, rc.blend, rc.attention_dump);
        io::atomic_write(dir / "predictions" / (rec.record_id + ".json"),
                         post::prediction_to_json(rp.prediction));
        if (rc.attention_dump)
            io::atomic_write(dir / "attention" / (rec.record_id + ".csv"), rp.attention_csv);
        log::debug("predicted " + rec.record_id + " -> " +
                   data::label_name(rp.prediction.label));
    }
    cfg::write_snapshot(dir, rc);
    log::info(std::to_string(records.size()) + " predictions written to " +
              (dir / "predictions").string());
    return 0;
}

// --- score -----------------------------------------------------------------

score::ScoreReport run_scoring(const cfg::RunConfig& rc, const score::ScoringMatrix& matrix) {
    const auto records = data::load_records(rc.data_manifest, rc.model.beat_len);
    const std::filesystem::path pred_dir(rc.pred_dir);
    std::vector<score::RecordPair> pairs;
    for (const data::SignalRecord& rec : records) {
        const std::filesystem::path path = pred_dir / (rec.record_id + ".json");
        if (!std::filesystem::exists(path))
            throw DataError("no prediction for record '" + rec.record_id + "'");
        const post::Prediction pred = post::prediction_from_json(io::read_file(path));
        if (pred.record_id != rec.record_id)
            throw DataError("prediction file " + path.string() + " names record '" +
                            pred.record_id + "'");
        score::RecordPair pair;
        pair.record_id = rec.record_id;
        pair.truth_label = rec.series_label;
        pair.truth_episodes = rec.episodes;
        pair.pred_label = pred.label;
        pair.pred_episodes = pred.episodes;
        pair.beat_len = rc.model.beat_len;
        pair.beat_positions = rec.beat_positions;
        pairs.push_back(std::move(pair));
    }
    return score::score_dataset(pairs, matrix);
}

int cmd_score(const cfg::RunConfig& rc) {
    require(!rc.out_dir.empty(), "score: --out is required");
    require(!rc.data_manifest.empty(), "score: --data (paths.data) is required");
    require(!rc.pred_dir.empty(), "score: --pred (paths.pred) is required");

    score::ScoringMatrix matrix = score::default_matrix();
    if (!rc.matrix_path.empty()) {
        try {
            matrix = score::load_matrix_csv(rc.matrix_path);
        } catch (const ParseError& e) {
            log::error(std::string("matrix: ") + e.what());
            throw ExitCode{7};
        }
    }
    const score::ScoreReport report = run_scoring(rc, matrix);
    const std::filesystem::path dir(rc.out_dir);
    io::ensure_dir(dir);
    io::atomic_write(dir / "per_record.csv", score::report_to_csv(report));
    io::atomic_write(dir / "summary.json", score::report_to_json(report));
    cfg::write_snapshot(dir, rc);
    std::printf("records   %zu\nU_r_mean  %.6f\nU_e_sum   %.6f\nU         %.6f\n",
                report.records.size(), report.u_r_mean, report.u_e_sum, report.u);
    return 0;
}

// --- synth -----------------------------------------------------------------

int cmd_synth(const cfg::RunConfig& rc) {
    require(!rc.out_dir.empty(), "synth: --out is required");
    const auto records = data::synthesize(rc.synth);
    const std::filesystem::path dir(rc.out_dir);
    const auto manifest = data::save_corpus(dir, records);
    cfg::write_snapshot(dir, rc);

    std::array<int, 3> counts{};
    std::array<double, 3> sum{};
    std::array<double, 3> sum2{};
    for (const data::SignalRecord& rec : records) {
        const auto c = static_cast<std::size_t>(rec.series_label);
        const auto n = static_cast<double>(rec.samples.size());
        ++counts[c];
        sum[c] += n;
        sum2[c] += n * n;
    }
    std::printf("%-6s %8s %8s %10s %10s\n", "class", "records", "mix", "len_mean",
                "len_std");
    const auto row = [&](const char* name, int cnt, double s, double s2) {
        const double mean = cnt > 0 ? s / cnt : 0.0;
        const double var = cnt > 0 ? s2 / cnt - mean * mean : 0.0;
        std::printf("%-6s %8d %8.3f %10.1f %10.1f\n", name, cnt,
                    cnt / static_cast<double>(records.size()), mean,
                    std::sqrt(std::max(0.0, var)));
    };
    for (int c = 0; c < 3; ++c)
        row(data::label_name(static_cast<data::SeriesLabel>(c)).c_str(),
            counts[static_cast<std::size_t>(c)], sum[static_cast<std::size_t>(c)],
            sum2[static_cast<std::size_t>(c)]);
    row("all", static_cast<int>(records.size()), sum[0] + sum[1] + sum[2],
        sum2[0] + sum2[1] + sum2[2]);
    log::info("corpus manifest at " + manifest.string());
    return 0;
}

// --- ablate ----------------------------------------------------------------

struct AblateCell {
    std::string name;
    std::function<void(cfg::RunConfig&)> tweak;
};

std::vector<AblateCell> ablation_grid() {
    std::vector<AblateCell> cells;
    for (const net::TrainMode mode :
         {net::TrainMode::joint, net::TrainMode::pretrain1_finetune2,
          net::TrainMode::pretrain2_finetune1, net::TrainMode::independent})
        cells.push_back({"mode_" + net::train_mode_name(mode),
                         [mode](cfg::RunConfig& c) { c.mode = mode; }});
    for (const int d : {0, 8, 64, 256})
        cells.push_back({"d_proj_" + std::to_string(d),
                         [d](cfg::RunConfig& c) { c.model.d_proj = d; }});
    for (const int l : {150, 1500, 6000})
        cells.push_back({"l_slice_" + std::to_string(l),
                         [l](cfg::RunConfig& c) { c.model.l_slice = l; }});
    for (const bool on : {false, true})
        cells.push_back(
            {std::string("slice_features_") + (on ? "on" : "off"),
             [on](cfg::RunConfig& c) { c.model.concat_slice_features_to_head2 = on; }});
    return cells;
}

int cmd_ablate(const cfg::RunConfig& rc) {
    require(!rc.out_dir.empty(), "ablate: --out is required");
    require(!rc.data_manifest.empty(), "ablate: --data (paths.data) is required");

    const auto records = data::load_records(rc.data_manifest, rc.model.beat_len);
    const auto splits = data::split_dataset(records, rc.split, rc.split_seed);
    require(!splits[2].empty(), "ablate: the split leaves no test records");
    const std::filesystem::path dir(rc.out_dir);
    io::ensure_dir(dir);
    const auto test_manifest = data::save_corpus(dir / "test_split", splits[2]);

    struct Row {
        std::string name;
        bool ok = false;
        double u_r = 0, u_e = 0, u = 0;
        std::string status;
    };
    std::vector<Row> rows;
    for (const AblateCell& cell : ablation_grid()) {
        cfg::RunConfig cc = rc;
        cell.tweak(cc);
        const std::filesystem::path cell_dir = dir / "cells" / cell.name;
        Row row;
        row.name = cell.name;
        try {
            cc.out_dir = (cell_dir / "train").string();
            run_training(cc, splits[0], splits[1]);

            cfg::RunConfig pc = cc;
            pc.checkpoint = (cell_dir / "train" / "model.ckpt").string();
            pc.data_manifest = test_manifest.string();
            pc.out_dir = (cell_dir / "predict").string();
            cmd_predict(pc);

            cfg::RunConfig sc = pc;
            sc.pred_dir = (cell_dir / "predict" / "predictions").string();
            sc.out_dir = (cell_dir / "score").string();
            score::ScoringMatrix matrix = score::default_matrix();
            if (!sc.matrix_path.empty()) matrix = score::load_matrix_csv(sc.matrix_path);
            const score::ScoreReport report = run_scoring(sc, matrix);
            io::ensure_dir(sc.out_dir);
            io::atomic_write(cell_dir / "score" / "per_record.csv",
                             score::report_to_csv(report));
            io::atomic_write(cell_dir / "score" / "summary.json",
                             score::report_to_json(report));
            cfg::write_snapshot(cell_dir / "score", sc);

            row.ok = true;
            row.u_r = report.u_r_mean;
            row.u_e = report.u_e_sum;
            row.u = report.u;
            row.status = "ok";
        } catch (const Error& e) {
            row.status = std::string("error: ") + e.what();
            log::error("cell " + cell.name + " failed: " + e.what());
        }
        rows.push_back(std::move(row));
    }

    std::string csv = "cell,U_r,U_e,U,status\n";
    for (const Row& r : rows) {
        std::string status = r.status;
        for (char& c : status)
            if (c == ',' || c == '\n') c = ';';
        csv += r.name + ",";
        if (r.ok)
            csv += fmt_double(r.u_r) + "," + fmt_double(r.u_e) + "," + fmt_double(r.u);
        else
            csv += ",,";
        csv += "," + status + "\n";
    }
    io::atomic_write(dir / "ablation.csv", csv);

    const auto find_u = [&](const std::string& name) -> std::optional<double> {
        for (const Row& r : rows)
            if (r.name == name && r.ok) return r.u;
        return std::nullopt;
    };
    std::string trends;
    const auto with_proj = find_u("d_proj_64");
    const auto without_proj = find_u("d_proj_0");
    if (with_proj && without_proj)
        trends += "d_proj 64 (U=" + fmt_double(*with_proj) + ") vs 0 (U=" +
                  fmt_double(*without_proj) + "): " +
                  (*with_proj >= *without_proj ? "reproduced" : "not reproduced") + "\n";
    else
        trends += "d_proj 64 vs 0: unavailable\n";
    trends += "note: directional trends are advisory at synthetic scale\n";
    io::atomic_write(dir / "trends.txt", trends);
    cfg::write_snapshot(dir, rc);

    std::printf("%-28s %10s %10s %10s  %s\n", "cell", "U_r", "U_e", "U", "status");
    for (const Row& r : rows) {
        if (r.ok)
            std::printf("%-28s %10.4f %10.4f %10.4f  %s\n", r.name.c_str(), r.u_r, r.u_e,
                        r.u, r.status.c_str());
        else
            std::printf("%-28s %10s %10s %10s  %s\n", r.name.c_str(), "-", "-", "-",
                        r.status.c_str());
    }
    return 0;
}

int fail(int code, const char* kind, const std::string& message) {
    log::error(std::string(kind) + ": " + message);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-class AF rhythm discrimination and episode localization pipeline"};
    app.require_subcommand(1);
    int code = 0;

    CommonArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate an annotated synthetic corpus");
    add_common(synth, synth_args);
    synth->callback([&] { code = cmd_synth(build_config(synth_args, {})); });

    CommonArgs train_args;
    std::string train_data, train_mode, train_epochs, train_init;
    auto* train = app.add_subcommand("train", "split a corpus and fit the model");
    add_common(train, train_args);
    train->add_option("--data", train_data, "corpus manifest csv");
    train->add_option("--mode", train_mode, "training mode");
    train->add_option("--epochs", train_epochs, "epoch budget");
    train->add_option("--init-from", train_init, "warm-start checkpoint");
    train->callback([&] {
        cfg::KeyValues kv;
        if (!train_data.empty()) kv["paths.data"] = train_data;
        if (!train_mode.empty()) kv["train.mode"] = train_mode;
        if (!train_epochs.empty()) kv["train.epochs"] = train_epochs;
        if (!train_init.empty()) kv["paths.init_from"] = train_init;
        code = cmd_train(build_config(train_args, kv));
    });

    CommonArgs predict_args;
    std::string predict_data, predict_ckpt;
    bool predict_attention = false;
    auto* predict = app.add_subcommand("predict", "run inference and post-processing");
    add_common(predict, predict_args);
    predict->add_option("--data", predict_data, "corpus manifest csv");
    predict->add_option("--checkpoint", predict_ckpt, "trained checkpoint");
    predict->add_flag("--attention-dump", predict_attention,
                      "emit per-record attention/probability CSVs");
    predict->callback([&] {
        cfg::KeyValues kv;
        if (!predict_data.empty()) kv["paths.data"] = predict_data;
        if (!predict_ckpt.empty()) kv["paths.checkpoint"] = predict_ckpt;
        if (predict_attention) kv["predict.attention_dump"] = "true";
        code = cmd_predict(build_config(predict_args, kv));
    });

    CommonArgs score_args;
    std::string score_data, score_pred, score_matrix;
    auto* score_cmd = app.add_subcommand("score", "score predictions against truth");
    add_common(score_cmd, score_args);
    score_cmd->add_option("--data", score_data, "truth manifest csv");
    score_cmd->add_option("--pred", score_pred, "directory of prediction JSONs");
    score_cmd->add_option("--matrix", score_matrix, "scoring matrix csv");
    score_cmd->callback([&] {
        cfg::KeyValues kv;
        if (!score_data.empty()) kv["paths.data"] = score_data;
        if (!score_pred.empty()) kv["paths.pred"] = score_pred;
        if (!score_matrix.empty()) kv["paths.matrix"] = score_matrix;
        code = cmd_score(build_config(score_args, kv));
    });

    CommonArgs ablate_args;
    std::string ablate_data, ablate_epochs;
    auto* ablate = app.add_subcommand("ablate", "train/predict/score over the knob grid");
    add_common(ablate, ablate_args);
    ablate->add_option("--data", ablate_data, "corpus manifest csv");
    ablate->add_option("--epochs", ablate_epochs, "epoch budget per cell");
    ablate->callback([&] {
        cfg::KeyValues kv;
        if (!ablate_data.empty()) kv["paths.data"] = ablate_data;
        if (!ablate_epochs.empty()) kv["train.epochs"] = ablate_epochs;
        code = cmd_ablate(build_config(ablate_args, kv));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ExitCode& e) {
        return e.code;
    } catch (const SpecError& e) {
        return fail(2, "spec", e.what());
    } catch (const NumericalError& e) {
        return fail(4, "numerical", e.what());
    } catch (const CheckpointMismatchError& e) {
        return fail(5, "checkpoint", e.what());
    } catch (const DataError& e) {
        return fail(6, "data", e.what());
    } catch (const Error& e) {
        return fail(3, "validation", e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal", e.what());
    }
    return code;
}
