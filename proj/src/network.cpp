#include "mma/network.hpp"

#include <algorithm>

#include <json.hpp>

#include "mma/error.hpp"
#include "mma/ops.hpp"

namespace mma::net {

void ModelConfig::validate() const {
    if (beat_len < 1 || l_slice < 1 || l_slice % beat_len != 0)
        throw ContractError("config: l_slice " + std::to_string(l_slice) +
                            " must be a positive multiple of beat_len " +
                            std::to_string(beat_len));
    if (d_proj < 0) throw ContractError("config: d_proj must be >= 0");
    if (d_hidden < 1) throw ContractError("config: d_hidden must be >= 1");
    if (n_classes < 2) throw ContractError("config: n_classes must be >= 2");
    if (dropout_rate < 0 || dropout_rate >= 1)
        throw ContractError("config: dropout_rate must be in [0,1)");
    if (w_d <= 0 || w_l <= 0) throw ContractError("config: loss weights must be positive");
}

std::string config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["d_proj"] = cfg.d_proj;
    j["d_hidden"] = cfg.d_hidden;
    j["beat_len"] = cfg.beat_len;
    j["l_slice"] = cfg.l_slice;
    j["n_classes"] = cfg.n_classes;
    j["dropout_rate"] = cfg.dropout_rate;
    j["w_d"] = cfg.w_d;
    j["w_l"] = cfg.w_l;
    j["concat_slice_features_to_head2"] = cfg.concat_slice_features_to_head2;
    j["init_scheme"] = cfg.init_scheme == InitScheme::glorot ? "glorot" : "he";
    return j.dump(2) + "\n";
}

ModelConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model config: ") + e.what());
    }
    ModelConfig cfg;
    try {
        cfg.d_proj = j.value("d_proj", cfg.d_proj);
        cfg.d_hidden = j.value("d_hidden", cfg.d_hidden);
        cfg.beat_len = j.value("beat_len", cfg.beat_len);
        cfg.l_slice = j.value("l_slice", cfg.l_slice);
        cfg.n_classes = j.value("n_classes", cfg.n_classes);
        cfg.dropout_rate = j.value("dropout_rate", cfg.dropout_rate);
        cfg.w_d = j.value("w_d", cfg.w_d);
        cfg.w_l = j.value("w_l", cfg.w_l);
        cfg.concat_slice_features_to_head2 =
            j.value("concat_slice_features_to_head2", cfg.concat_slice_features_to_head2);
        const std::string scheme = j.value("init_scheme", std::string("glorot"));
        if (scheme == "glorot")
            cfg.init_scheme = InitScheme::glorot;
        else if (scheme == "he")
            cfg.init_scheme = InitScheme::he;
        else
            throw ParseError("model config: unknown init_scheme '" + scheme + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

struct Builder {
    ParamStore store;
    RngStream* rng = nullptr;  // null builds zeros
    InitScheme scheme = InitScheme::glorot;

    void weight(const std::string& name, std::vector<int> shape, int fan_in, int fan_out) {
        store.add(name, rng ? init_weight(std::move(shape), fan_in, fan_out, *rng, scheme)
                            : Tensor::zeros(std::move(shape), true));
    }
    void bias(const std::string& name, int n) {
        store.add(name, Tensor::zeros({n}, true));
    }
    void lstm(const std::string& prefix, int d_in, int hidden) {
        for (const char* dir : {"fwd", "bwd"}) {
            const std::string p = prefix + "." + dir + ".";
            weight(p + "w_x", {4 * hidden, d_in}, d_in, hidden);
            weight(p + "w_h", {4 * hidden, hidden}, hidden, hidden);
            bias(p + "b", 4 * hidden);
        }
    }
    void attention(const std::string& prefix, int a, int d) {
        weight(prefix + ".w", {a, d}, d, a);
        bias(prefix + ".b", a);
        weight(prefix + ".q", {a}, a, 1);
    }
};

ParamStore build(const ModelConfig& cfg, RngStream* rng) {
    cfg.validate();
    Builder b;
    b.rng = rng;
    b.scheme = cfg.init_scheme;
    const int two_h = 2 * cfg.d_hidden;
    const int a = cfg.attn_dim();
    if (cfg.d_proj > 0) {
        b.weight("proj.w", {cfg.d_proj, 1}, 1, cfg.d_proj);
        b.bias("proj.b", cfg.d_proj);
    }
    const int point_in = cfg.d_proj > 0 ? cfg.d_proj : 1;
    b.lstm("point_lstm", point_in, cfg.d_hidden);
    b.attention("beat_attn", a, two_h);
    b.lstm("beat_lstm", two_h, cfg.d_hidden);
    b.attention("slice_attn", a, two_h);
    b.weight("head1.w", {cfg.n_classes, two_h}, two_h, cfg.n_classes);
    const int head2_in = cfg.concat_slice_features_to_head2 ? 2 * two_h : two_h;
    b.weight("head2.w1", {two_h, head2_in}, head2_in, two_h);
    b.bias("head2.b1", two_h);
    b.weight("head2.w2", {1, two_h}, two_h, 1);
    b.bias("head2.b2", 1);
    return std::move(b.store);
}

BiLstmParams lstm_params(ParamStore& p, const std::string& prefix) {
    return {{p.get(prefix + ".fwd.w_x"), p.get(prefix + ".fwd.w_h"), p.get(prefix + ".fwd.b")},
            {p.get(prefix + ".bwd.w_x"), p.get(prefix + ".bwd.w_h"), p.get(prefix + ".bwd.b")}};
}

}  // namespace

ParamStore build_params(const ModelConfig& cfg, RngStream& rng) {
    return build(cfg, &rng);
}

ParamStore build_zero_params(const ModelConfig& cfg) {
    return build(cfg, nullptr);
}

Tensor project_points(Tape& tape, const Tensor& x, ParamStore& params,
                      const ModelConfig& cfg) {
    if (x.rank() != 2 || x.dim(1) != 1)
        throw DimensionError("project_points: expected [L x 1] input, got " +
                             shape_str(x.shape()));
    if (cfg.d_proj == 0) return x;
    return ops::add_rowvec(tape,
                           ops::matmul(tape, x, ops::transpose(tape, params.get("proj.w"))),
                           params.get("proj.b"));
}

AttentionPool attention_pool(Tape& tape, const Tensor& h, const Tensor& w,
                             const Tensor& b, const Tensor& q,
                             const std::vector<bool>* mask) {
    if (h.rank() != 2) throw DimensionError("attention_pool: expected [n x d] input");
    const int n = h.dim(0);
    const int a = w.dim(0);
    Tensor scores_mat = ops::tanh(tape, ops::add_rowvec(tape, ops::matmul(tape, h, ops::transpose(tape, w)), b));
    Tensor scores = ops::reshape(tape, ops::matmul(tape, scores_mat, ops::reshape(tape, q, {a, 1})), {n});
    Tensor weights = ops::softmax(tape, scores, mask);
    Tensor pooled = ops::reshape(tape, ops::matmul(tape, ops::reshape(tape, weights, {1, n}), h),
                                 {h.dim(1)});
    return {pooled, weights};
}

ForwardOutput forward(Tape& tape, const std::vector<double>& slice,
                      const std::vector<bool>& mask, ParamStore& params,
                      const ModelConfig& cfg, RunMode mode, RngStream& rng) {
    cfg.validate();
    const int length = cfg.l_slice;
    if (static_cast<int>(slice.size()) != length ||
        static_cast<int>(mask.size()) != length)
        throw ContractError("forward: slice/mask length " + std::to_string(slice.size()) +
                            "/" + std::to_string(mask.size()) + " != l_slice " +
                            std::to_string(length));
    const int t_len = cfg.beat_len;
    const int m_beats = cfg.beats();
    const int two_h = 2 * cfg.d_hidden;

    // padded samples are forced to exactly zero so they cannot reach any output
    std::vector<double> masked(slice.size());
    for (std::size_t i = 0; i < slice.size(); ++i) masked[i] = mask[i] ? slice[i] : 0.0;
    Tensor x = Tensor::from({length, 1}, std::move(masked));

    Tensor feats = project_points(tape, x, params, cfg);
    Tensor h_pt = bilstm(tape, feats, lstm_params(params, "point_lstm"));  // [L x 2H]

    std::vector<Tensor> beat_vecs;
    std::vector<Tensor> alpha_rows;
    std::vector<bool> beat_valid(static_cast<std::size_t>(m_beats));
    beat_vecs.reserve(static_cast<std::size_t>(m_beats));
    for (int m = 0; m < m_beats; ++m) {
        std::vector<bool> bm(mask.begin() + static_cast<std::ptrdiff_t>(m) * t_len,
                             mask.begin() + static_cast<std::ptrdiff_t>(m + 1) * t_len);
        const bool valid = std::find(bm.begin(), bm.end(), true) != bm.end();
        beat_valid[static_cast<std::size_t>(m)] = valid;
        if (valid) {
            Tensor rows = ops::slice_rows(tape, h_pt, m * t_len, (m + 1) * t_len);
            AttentionPool ap =
                attention_pool(tape, rows, params.get("beat_attn.w"),
                               params.get("beat_attn.b"), params.get("beat_attn.q"), &bm);
            beat_vecs.push_back(ap.pooled);
            alpha_rows.push_back(ap.weights);
        } else {
            beat_vecs.push_back(Tensor::zeros({two_h}));
            alpha_rows.push_back(Tensor::zeros({t_len}));
        }
    }

    Tensor beat_seq = ops::stack_rows(tape, beat_vecs);                      // [M x 2H]
    Tensor h_beat = bilstm(tape, beat_seq, lstm_params(params, "beat_lstm"));  // [M x 2H]
    AttentionPool sp =
        attention_pool(tape, h_beat, params.get("slice_attn.w"),
                       params.get("slice_attn.b"), params.get("slice_attn.q"), &beat_valid);

    Tensor logits = ops::reshape(
        tape, ops::matmul(tape, params.get("head1.w"), ops::reshape(tape, sp.pooled, {two_h, 1})),
        {cfg.n_classes});

    Tensor feat2 = h_pt;
    if (cfg.concat_slice_features_to_head2)
        feat2 = ops::concat(tape, h_pt, ops::tile_rows(tape, sp.pooled, length), 1);
    Tensor z1 = ops::tanh(
        tape, ops::add_rowvec(
                  tape, ops::matmul(tape, feat2, ops::transpose(tape, params.get("head2.w1"))),
                  params.get("head2.b1")));
    Tensor z1d = ops::dropout(tape, z1, cfg.dropout_rate, mode == RunMode::train, rng);
    Tensor logit2 = ops::add_rowvec(
        tape, ops::matmul(tape, z1d, ops::transpose(tape, params.get("head2.w2"))),
        params.get("head2.b2"));

    ForwardOutput out;
    out.slice_probs = ops::softmax(tape, logits);
    out.point_probs = ops::reshape(tape, ops::sigmoid(tape, logit2), {length});
    out.beat_attention = ops::stack_rows(tape, alpha_rows);
    out.slice_attention = sp.weights;
    out.slice_vector = sp.pooled;
    out.beat_valid = std::move(beat_valid);
    return out;
}

Tensor joint_loss(Tape& tape, const ForwardOutput& out, int slice_label,
                  const std::vector<double>& point_labels,
                  const std::vector<bool>& mask, const ModelConfig& cfg) {
    Tensor l_d = ops::categorical_cross_entropy(tape, out.slice_probs, slice_label);
    Tensor l_l = ops::masked_mean_bce(tape, out.point_probs, point_labels, mask);
    return ops::add_scaled(tape, l_d, cfg.w_d, l_l, cfg.w_l);
}

}  // namespace mma::net
