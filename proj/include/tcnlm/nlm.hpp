#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tcnlm/config.hpp"
#include "tcnlm/rng.hpp"
#include "tcnlm/tape.hpp"

namespace tcnlm {

// Gate order used everywhere: input, forget, output, candidate.
enum GateIndex { kGateI = 0, kGateF = 1, kGateO = 2, kGateC = 3 };

// One gate's factored weights: W(t) = w_a diag(w_b t) w_c and likewise for
// the recurrent side. w_a/u_a are n_h x n_f, w_b/u_b are n_f x T, w_c is
// n_f x (input width), u_c is n_f x n_h.
struct GateFactors {
    Array w_a, w_b, w_c, u_a, u_b, u_c, bias;
};

struct TclstmLayer {
    std::array<GateFactors, 4> gates;
};

// Topic-compositional LSTM language model. The topic usage vector t selects
// a convex mixture of per-topic weight matrices through the shared factors;
// the factored recurrence adds 4 n_f (n_x + 2T + 3 n_h) parameters per layer
// beyond embeddings, biases and the output projection.
struct TclstmParams {
    Array embeddings;     // D_lm x n_x
    Array bos_embedding;  // 1 x n_x, fed as the first input
    std::vector<TclstmLayer> layers;
    Array v_out;  // D_lm x n_h
    int D_lm = 0, n_x = 0, n_h = 0, n_f = 0, T = 0;
    bool candidate_tanh = false;

    static TclstmParams init(int D_lm, const ModelConfig& cfg, RngStream& rng);
    void for_each(const std::function<void(const std::string&, Array&)>& fn);
};

// Factored recurrence parameters for one layer at the given input width.
int64_t parameter_count(int n_f, int n_x, int T, int n_h);

// Explicit W(t) = w_a diag(w_b t) w_c. Linear in t; used for testing the
// factored path and for one-hot generation equivalence.
Array compose_weight(const Array& w_a, const Array& w_b, const Array& w_c, const Array& t);

struct GateFactorVars {
    ad::Var w_a, w_b, w_c, u_a, u_b, u_c, bias;
};

struct TclstmVars {
    ad::Var embeddings, bos_embedding, v_out;
    std::vector<std::array<GateFactorVars, 4>> layers;
    bool candidate_tanh = false;
};

struct StageMap;  // staging.hpp
TclstmVars tclstm_vars(const StageMap& staged, const TclstmParams& p);
TclstmVars stage_tclstm(ad::Tape& tape, TclstmParams& p, bool trainable = true);

struct LstmState {
    ad::Var h, c;
};

// Per-gate topic projections (w_b t, u_b t), fixed for a whole sequence.
struct TopicProjection {
    std::array<ad::Var, 4> wbt, ubt;
};

std::vector<TopicProjection> project_topic(ad::Tape& tape, const TclstmVars& v, ad::Var t);

LstmState tclstm_step(ad::Tape& tape, const TclstmVars& v, int layer, const TopicProjection& proj,
                      ad::Var x, const LstmState& prev);

ad::Var output_logits(ad::Tape& tape, const TclstmVars& v, ad::Var h);

// Inverted-dropout masks, pre-sampled per (layer, step) and recorded as
// constants; pass nullptr for evaluation.
struct DropoutMasks {
    std::vector<std::vector<Array>> masks;  // [layer][step], each n_h x 1
};

DropoutMasks sample_dropout_masks(RngStream& rng, int layers, int steps, int n_h, double rate);

// Total teacher-forced negative log-likelihood of ids (must end with <eos>).
// h0 = c0 = 0; the first input is the learned <bos> embedding; t is fixed
// for the whole sequence.
ad::Var sequence_nll(ad::Tape& tape, const TclstmVars& v, ad::Var t, const std::vector<int>& ids,
                     const DropoutMasks* dropout = nullptr);

// ---- baselines -------------------------------------------------------------

// Standard single-layer LSTM language model with full weight matrices.
struct LstmParams {
    Array embeddings, bos_embedding;
    struct Gate {
        Array w, u, bias;  // n_h x n_x, n_h x n_h, n_h x 1
    };
    std::array<Gate, 4> gates;
    Array v_out;
    int D_lm = 0, n_x = 0, n_h = 0;
    bool candidate_tanh = false;

    static LstmParams init(int D_lm, const ModelConfig& cfg, RngStream& rng);
    void for_each(const std::function<void(const std::string&, Array&)>& fn);
};

struct LstmVars {
    ad::Var embeddings, bos_embedding, v_out;
    struct Gate {
        ad::Var w, u, bias;
    };
    std::array<Gate, 4> gates;
    bool candidate_tanh = false;
};

LstmVars lstm_vars(const StageMap& staged, const LstmParams& p);
LstmVars stage_lstm(ad::Tape& tape, LstmParams& p, bool trainable = true);
ad::Var lstm_sequence_nll(ad::Tape& tape, const LstmVars& v, const std::vector<int>& ids,
                          const DropoutMasks* dropout = nullptr);

// Naive mixture-of-experts: T independent sigmoid-RNN experts, each with its
// own hidden state; the output distribution is sum_k t_k softmax(V h^(k)).
struct NaiveMoeParams {
    Array embeddings, bos_embedding;
    std::vector<Array> w, u, bias;  // per expert
    Array v_out;
    int D_lm = 0, n_x = 0, n_h = 0, T = 0;

    static NaiveMoeParams init(int D_lm, const ModelConfig& cfg, RngStream& rng);
    void for_each(const std::function<void(const std::string&, Array&)>& fn);
};

struct NaiveMoeVars {
    ad::Var embeddings, bos_embedding, v_out;
    std::vector<ad::Var> w, u, bias;
};

NaiveMoeVars moe_vars(const StageMap& staged, const NaiveMoeParams& p);
NaiveMoeVars stage_moe(ad::Tape& tape, NaiveMoeParams& p, bool trainable = true);

struct MoeStep {
    ad::Var p;                // D_lm x 1 mixture distribution
    std::vector<ad::Var> h;   // updated per-expert states
};

MoeStep naive_moe_step(ad::Tape& tape, const NaiveMoeVars& v, ad::Var t, ad::Var x,
                       const std::vector<ad::Var>& h_prev);

ad::Var moe_sequence_nll(ad::Tape& tape, const NaiveMoeVars& v, ad::Var t,
                         const std::vector<int>& ids);

// Shared helpers.
ad::Var embedding_input(ad::Tape& tape, ad::Var embeddings, ad::Var bos, int prev_token);
ad::Var pick_neg_log_prob(ad::Tape& tape, ad::Var dist_col, int id);  // -log p[id]

}  // namespace tcnlm
