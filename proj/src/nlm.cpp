#include "tcnlm/nlm.hpp"

#include <cmath>

#include "tcnlm/corpus.hpp"
#include "tcnlm/staging.hpp"

namespace tcnlm {

namespace {

const char* kGateNames[4] = {"i", "f", "o", "c"};

GateFactors init_gate(int in_width, int n_h, int n_f, int T, RngStream& rng) {
    // The b-factors start at 1 so diag(W_b t) is the identity for any t on
    // the simplex, and the outer factors are scaled so W_a W_c matches the
    // variance of a plain uniform(-0.05, 0.05) recurrence matrix. A flat
    // +-0.05 draw for all six factors leaves the composed weight ~sqrt(n_f)
    // times 0.05^2, which is too weak to train out of.
    const double r = std::pow(9.0 * (0.05 * 0.05 / 3.0) / n_f, 0.25);
    GateFactors g;
    g.w_a = rng.uniform_array(n_h, n_f, -r, r);
    g.w_b = rng.uniform_array(n_f, T, 1.0 - 0.05, 1.0 + 0.05);
    g.w_c = rng.uniform_array(n_f, in_width, -r, r);
    g.u_a = rng.uniform_array(n_h, n_f, -r, r);
    g.u_b = rng.uniform_array(n_f, T, 1.0 - 0.05, 1.0 + 0.05);
    g.u_c = rng.uniform_array(n_f, n_h, -r, r);
    g.bias = Array(n_h, 1);
    return g;
}

}  // namespace

TclstmParams TclstmParams::init(int D_lm, const ModelConfig& cfg, RngStream& rng) {
    TclstmParams p;
    p.D_lm = D_lm;
    p.n_x = cfg.n_x;
    p.n_h = cfg.n_h;
    p.n_f = cfg.n_f;
    p.T = cfg.T;
    p.candidate_tanh = cfg.candidate_tanh;
    p.embeddings = rng.normal_array(D_lm, cfg.n_x, 0.05);
    p.bos_embedding = rng.normal_array(1, cfg.n_x, 0.05);
    p.layers.resize(cfg.layers);
    for (int l = 0; l < cfg.layers; ++l) {
        const int in_width = l == 0 ? cfg.n_x : cfg.n_h;
        for (int g = 0; g < 4; ++g)
            p.layers[l].gates[g] = init_gate(in_width, cfg.n_h, cfg.n_f, cfg.T, rng);
    }
    p.v_out = rng.uniform_array(D_lm, cfg.n_h, -0.05, 0.05);
    return p;
}

void TclstmParams::for_each(const std::function<void(const std::string&, Array&)>& fn) {
    fn("nlm/embeddings", embeddings);
    fn("nlm/bos_embedding", bos_embedding);
    for (size_t l = 0; l < layers.size(); ++l) {
        const std::string base = "nlm/layer" + std::to_string(l) + "/";
        for (int g = 0; g < 4; ++g) {
            GateFactors& gate = layers[l].gates[g];
            const std::string gb = base + kGateNames[g] + "_";
            fn(gb + "w_a", gate.w_a);
            fn(gb + "w_b", gate.w_b);
            fn(gb + "w_c", gate.w_c);
            fn(gb + "u_a", gate.u_a);
            fn(gb + "u_b", gate.u_b);
            fn(gb + "u_c", gate.u_c);
            fn(gb + "bias", gate.bias);
        }
    }
    fn("nlm/v_out", v_out);
}

int64_t parameter_count(int n_f, int n_x, int T, int n_h) {
    return 4LL * n_f * (n_x + 2LL * T + 3LL * n_h);
}

Array compose_weight(const Array& w_a, const Array& w_b, const Array& w_c, const Array& t) {
    if (t.cols() != 1 || w_b.cols() != t.rows())
        throw ShapeError("compose_weight: t " + t.shape_str() + " vs w_b " + w_b.shape_str());
    if (w_a.cols() != w_b.rows() || w_b.rows() != w_c.rows())
        throw ShapeError("compose_weight: factor shapes " + w_a.shape_str() + ", " +
                         w_b.shape_str() + ", " + w_c.shape_str());
    const Array d = matmul(w_b, t);  // n_f x 1
    Array scaled = w_c;              // diag(d) * w_c
    for (int i = 0; i < scaled.rows(); ++i)
        for (int j = 0; j < scaled.cols(); ++j) scaled(i, j) *= d(i, 0);
    return matmul(w_a, scaled);
}

TclstmVars tclstm_vars(const StageMap& staged, const TclstmParams& p) {
    TclstmVars v;
    v.candidate_tanh = p.candidate_tanh;
    v.embeddings = staged.at(p.embeddings);
    v.bos_embedding = staged.at(p.bos_embedding);
    v.layers.resize(p.layers.size());
    for (size_t l = 0; l < p.layers.size(); ++l) {
        for (int g = 0; g < 4; ++g) {
            const GateFactors& gate = p.layers[l].gates[g];
            GateFactorVars& gv = v.layers[l][g];
            gv.w_a = staged.at(gate.w_a);
            gv.w_b = staged.at(gate.w_b);
            gv.w_c = staged.at(gate.w_c);
            gv.u_a = staged.at(gate.u_a);
            gv.u_b = staged.at(gate.u_b);
            gv.u_c = staged.at(gate.u_c);
            gv.bias = staged.at(gate.bias);
        }
    }
    v.v_out = staged.at(p.v_out);
    return v;
}

TclstmVars stage_tclstm(ad::Tape& tape, TclstmParams& p, bool trainable) {
    return tclstm_vars(stage_all(tape, p, trainable), p);
}

std::vector<TopicProjection> project_topic(ad::Tape& tape, const TclstmVars& v, ad::Var t) {
    std::vector<TopicProjection> out(v.layers.size());
    for (size_t l = 0; l < v.layers.size(); ++l) {
        for (int g = 0; g < 4; ++g) {
            out[l].wbt[g] = ad::matmul(v.layers[l][g].w_b, t);
            out[l].ubt[g] = ad::matmul(v.layers[l][g].u_b, t);
        }
    }
    (void)tape;
    return out;
}

LstmState tclstm_step(ad::Tape& tape, const TclstmVars& v, int layer, const TopicProjection& proj,
                      ad::Var x, const LstmState& prev) {
    (void)tape;
    const auto& gates = v.layers[layer];
    std::array<ad::Var, 4> pre;
    for (int g = 0; g < 4; ++g) {
        // x~ = (W_b t) (*) (W_c x), h~ = (U_b t) (*) (U_c h)
        ad::Var xt = ad::hadamard(proj.wbt[g], ad::matmul(gates[g].w_c, x));
        ad::Var ht = ad::hadamard(proj.ubt[g], ad::matmul(gates[g].u_c, prev.h));
        pre[g] = ad::add(ad::add(ad::matmul(gates[g].w_a, xt), ad::matmul(gates[g].u_a, ht)),
                         gates[g].bias);
    }
    ad::Var i = ad::sigmoid(pre[kGateI]);
    ad::Var f = ad::sigmoid(pre[kGateF]);
    ad::Var o = ad::sigmoid(pre[kGateO]);
    ad::Var cand = v.candidate_tanh ? ad::tanh(pre[kGateC]) : ad::sigmoid(pre[kGateC]);
    LstmState next;
    next.c = ad::add(ad::hadamard(i, cand), ad::hadamard(f, prev.c));
    next.h = ad::hadamard(o, ad::tanh(next.c));
    return next;
}

ad::Var output_logits(ad::Tape& tape, const TclstmVars& v, ad::Var h) {
    (void)tape;
    return ad::matmul(v.v_out, h);
}

DropoutMasks sample_dropout_masks(RngStream& rng, int layers, int steps, int n_h, double rate) {
    DropoutMasks d;
    d.masks.assign(layers, {});
    const double keep = 1.0 - rate;
    for (int l = 0; l < layers; ++l) {
        d.masks[l].reserve(steps);
        for (int s = 0; s < steps; ++s) {
            Array m(n_h, 1);
            for (int i = 0; i < n_h; ++i) m[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
            d.masks[l].push_back(std::move(m));
        }
    }
    return d;
}

ad::Var embedding_input(ad::Tape& tape, ad::Var embeddings, ad::Var bos, int prev_token) {
    (void)tape;
    if (prev_token < 0) return ad::transpose(bos);
    return ad::transpose(ad::gather_rows(embeddings, {prev_token}));
}

ad::Var pick_neg_log_prob(ad::Tape& tape, ad::Var dist_col, int id) {
    const Array& p = tape.value(dist_col);
    if (p.cols() != 1 || id < 0 || id >= p.rows())
        throw ShapeError("pick_neg_log_prob: id " + std::to_string(id) + " vs " + p.shape_str());
    Array one_hot(p.rows(), 1);
    one_hot(id, 0) = 1.0;
    return ad::scale(ad::sum(ad::hadamard(tape.constant(one_hot), ad::log(dist_col))), -1.0);
}

namespace {

void check_sequence(const std::vector<int>& ids) {
    if (ids.empty()) throw DataError("sequence_nll: empty sequence");
    if (ids.back() != kEosId) throw DataError("sequence_nll: sequence must end with <eos>");
}

}  // namespace

ad::Var sequence_nll(ad::Tape& tape, const TclstmVars& v, ad::Var t, const std::vector<int>& ids,
                     const DropoutMasks* dropout) {
    check_sequence(ids);
    const int n_h = tape.value(v.v_out).cols();
    const auto proj = project_topic(tape, v, t);
    std::vector<LstmState> state(v.layers.size());
    for (auto& s : state) {
        s.h = tape.constant(Array(n_h, 1));
        s.c = tape.constant(Array(n_h, 1));
    }
    ad::Var nll = tape.constant(Array(1, 1, 0.0));
    for (size_t m = 0; m < ids.size(); ++m) {
        ad::Var x = embedding_input(tape, v.embeddings, v.bos_embedding,
                                    m == 0 ? -1 : ids[m - 1]);
        for (size_t l = 0; l < v.layers.size(); ++l) {
            state[l] = tclstm_step(tape, v, static_cast<int>(l), proj[l], x, state[l]);
            x = dropout ? ad::dropout_mask(state[l].h, dropout->masks[l][m]) : state[l].h;
        }
        ad::Var dist = ad::softmax(ad::matmul(v.v_out, x));
        nll = ad::add(nll, pick_neg_log_prob(tape, dist, ids[m]));
    }
    return nll;
}

// ---- basic LSTM ------------------------------------------------------------

LstmParams LstmParams::init(int D_lm, const ModelConfig& cfg, RngStream& rng) {
    LstmParams p;
    p.D_lm = D_lm;
    p.n_x = cfg.n_x;
    p.n_h = cfg.n_h;
    p.candidate_tanh = cfg.candidate_tanh;
    p.embeddings = rng.normal_array(D_lm, cfg.n_x, 0.05);
    p.bos_embedding = rng.normal_array(1, cfg.n_x, 0.05);
    for (auto& g : p.gates) {
        g.w = rng.uniform_array(cfg.n_h, cfg.n_x, -0.05, 0.05);
        g.u = rng.uniform_array(cfg.n_h, cfg.n_h, -0.05, 0.05);
        g.bias = Array(cfg.n_h, 1);
    }
    p.v_out = rng.uniform_array(D_lm, cfg.n_h, -0.05, 0.05);
    return p;
}

void LstmParams::for_each(const std::function<void(const std::string&, Array&)>& fn) {
    fn("lstm/embeddings", embeddings);
    fn("lstm/bos_embedding", bos_embedding);
    for (int g = 0; g < 4; ++g) {
        const std::string gb = std::string("lstm/") + kGateNames[g] + "_";
        fn(gb + "w", gates[g].w);
        fn(gb + "u", gates[g].u);
        fn(gb + "bias", gates[g].bias);
    }
    fn("lstm/v_out", v_out);
}

LstmVars lstm_vars(const StageMap& staged, const LstmParams& p) {
    LstmVars v;
    v.candidate_tanh = p.candidate_tanh;
    v.embeddings = staged.at(p.embeddings);
    v.bos_embedding = staged.at(p.bos_embedding);
    for (int g = 0; g < 4; ++g) {
        v.gates[g].w = staged.at(p.gates[g].w);
        v.gates[g].u = staged.at(p.gates[g].u);
        v.gates[g].bias = staged.at(p.gates[g].bias);
    }
    v.v_out = staged.at(p.v_out);
    return v;
}

LstmVars stage_lstm(ad::Tape& tape, LstmParams& p, bool trainable) {
    return lstm_vars(stage_all(tape, p, trainable), p);
}

ad::Var lstm_sequence_nll(ad::Tape& tape, const LstmVars& v, const std::vector<int>& ids,
                          const DropoutMasks* dropout) {
    check_sequence(ids);
    const int n_h = tape.value(v.v_out).cols();
    LstmState s{tape.constant(Array(n_h, 1)), tape.constant(Array(n_h, 1))};
    ad::Var nll = tape.constant(Array(1, 1, 0.0));
    for (size_t m = 0; m < ids.size(); ++m) {
        ad::Var x = embedding_input(tape, v.embeddings, v.bos_embedding,
                                    m == 0 ? -1 : ids[m - 1]);
        std::array<ad::Var, 4> pre;
        for (int g = 0; g < 4; ++g)
            pre[g] = ad::add(ad::add(ad::matmul(v.gates[g].w, x), ad::matmul(v.gates[g].u, s.h)),
                             v.gates[g].bias);
        ad::Var i = ad::sigmoid(pre[kGateI]);
        ad::Var f = ad::sigmoid(pre[kGateF]);
        ad::Var o = ad::sigmoid(pre[kGateO]);
        ad::Var cand = v.candidate_tanh ? ad::tanh(pre[kGateC]) : ad::sigmoid(pre[kGateC]);
        s.c = ad::add(ad::hadamard(i, cand), ad::hadamard(f, s.c));
        s.h = ad::hadamard(o, ad::tanh(s.c));
        ad::Var top = dropout ? ad::dropout_mask(s.h, dropout->masks[0][m]) : s.h;
        ad::Var dist = ad::softmax(ad::matmul(v.v_out, top));
        nll = ad::add(nll, pick_neg_log_prob(tape, dist, ids[m]));
    }
    return nll;
}

// ---- naive MoE -------------------------------------------------------------

NaiveMoeParams NaiveMoeParams::init(int D_lm, const ModelConfig& cfg, RngStream& rng) {
    NaiveMoeParams p;
    p.D_lm = D_lm;
    p.n_x = cfg.n_x;
    p.n_h = cfg.n_h;
    p.T = cfg.T;
    p.embeddings = rng.normal_array(D_lm, cfg.n_x, 0.05);
    p.bos_embedding = rng.normal_array(1, cfg.n_x, 0.05);
    // Experts share one base matrix with a small relative jitter, the same
    // structure the factored cell starts from (b-factors at 1 +- 0.05):
    // specialization is driven by the gating signal, not by independent
    // expert draws whose noise swamps it.
    const Array w0 = rng.uniform_array(cfg.n_h, cfg.n_x, -0.05, 0.05);
    const Array u0 = rng.uniform_array(cfg.n_h, cfg.n_h, -0.05, 0.05);
    for (int k = 0; k < cfg.T; ++k) {
        Array w = w0, u = u0;
        for (int i = 0; i < w.size(); ++i) w[i] *= rng.uniform(0.95, 1.05);
        for (int i = 0; i < u.size(); ++i) u[i] *= rng.uniform(0.95, 1.05);
        p.w.push_back(std::move(w));
        p.u.push_back(std::move(u));
        p.bias.push_back(Array(cfg.n_h, 1));
    }
    p.v_out = rng.uniform_array(D_lm, cfg.n_h, -0.05, 0.05);
    return p;
}

void NaiveMoeParams::for_each(const std::function<void(const std::string&, Array&)>& fn) {
    fn("moe/embeddings", embeddings);
    fn("moe/bos_embedding", bos_embedding);
    for (int k = 0; k < T; ++k) {
        const std::string base = "moe/expert" + std::to_string(k) + "/";
        fn(base + "w", w[k]);
        fn(base + "u", u[k]);
        fn(base + "bias", bias[k]);
    }
    fn("moe/v_out", v_out);
}

NaiveMoeVars moe_vars(const StageMap& staged, const NaiveMoeParams& p) {
    NaiveMoeVars v;
    v.embeddings = staged.at(p.embeddings);
    v.bos_embedding = staged.at(p.bos_embedding);
    for (int k = 0; k < p.T; ++k) {
        v.w.push_back(staged.at(p.w[k]));
        v.u.push_back(staged.at(p.u[k]));
        v.bias.push_back(staged.at(p.bias[k]));
    }
    v.v_out = staged.at(p.v_out);
    return v;
}

NaiveMoeVars stage_moe(ad::Tape& tape, NaiveMoeParams& p, bool trainable) {
    return moe_vars(stage_all(tape, p, trainable), p);
}

MoeStep naive_moe_step(ad::Tape& tape, const NaiveMoeVars& v, ad::Var t, ad::Var x,
                       const std::vector<ad::Var>& h_prev) {
    const int T = static_cast<int>(v.w.size());
    if (tape.value(t).rows() != T || tape.value(t).cols() != 1)
        throw ShapeError("naive_moe_step: t " + tape.value(t).shape_str() + " for " +
                         std::to_string(T) + " experts");
    if (static_cast<int>(h_prev.size()) != T)
        throw ShapeError("naive_moe_step: expected one hidden state per expert");
    MoeStep out;
    out.h.reserve(T);
    for (int k = 0; k < T; ++k) {
        ad::Var h = ad::sigmoid(ad::add(
            ad::add(ad::matmul(v.w[k], x), ad::matmul(v.u[k], h_prev[k])), v.bias[k]));
        out.h.push_back(h);
        ad::Var expert_p = ad::softmax(ad::matmul(v.v_out, h));
        ad::Var weighted = ad::smul(ad::gather_rows(t, {k}), expert_p);
        out.p = k == 0 ? weighted : ad::add(out.p, weighted);
    }
    return out;
}

ad::Var moe_sequence_nll(ad::Tape& tape, const NaiveMoeVars& v, ad::Var t,
                         const std::vector<int>& ids) {
    check_sequence(ids);
    const int n_h = tape.value(v.v_out).cols();
    std::vector<ad::Var> h(v.w.size());
    for (auto& s : h) s = tape.constant(Array(n_h, 1));
    ad::Var nll = tape.constant(Array(1, 1, 0.0));
    for (size_t m = 0; m < ids.size(); ++m) {
        ad::Var x = embedding_input(tape, v.embeddings, v.bos_embedding,
                                    m == 0 ? -1 : ids[m - 1]);
        MoeStep step = naive_moe_step(tape, v, t, x, h);
        h = std::move(step.h);
        nll = ad::add(nll, pick_neg_log_prob(tape, step.p, ids[m]));
    }
    return nll;
}

}  // namespace tcnlm
