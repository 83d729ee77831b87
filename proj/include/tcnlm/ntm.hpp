#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tcnlm/config.hpp"
#include "tcnlm/rng.hpp"
#include "tcnlm/tape.hpp"

namespace tcnlm {

// Gaussian-softmax neural topic model: a 2-layer ReLU encoder produces the
// posterior q(t|d) = N(mu, diag(exp(logvar))), a sample theta maps to the
// topic usage t = softmax(topic_w * theta + topic_b), and the word
// distributions are the row-softmax of beta_logits. The per-word topic
// assignment is marginalized analytically, so p(word|t) = (beta^T t).
struct NtmParams {
    Array enc_w1, enc_b1;  // D -> enc_hidden1
    Array enc_w2, enc_b2;  // enc_hidden1 -> enc_hidden2
    Array mu_w, mu_b;      // enc_hidden2 -> T
    Array logvar_w, logvar_b;
    Array topic_w, topic_b;  // T -> T
    Array beta_logits;       // T x D
    double mu0 = 0.0;
    double sigma0 = 1.0;
    int D = 0;
    int T = 0;

    static NtmParams init(int D, const ModelConfig& cfg, RngStream& rng);

    // Visits tensors in the fixed declared order (init, Adam keys, checkpoint).
    void for_each(const std::function<void(const std::string&, Array&)>& fn);
};

// Parameter leaves staged on a tape, plus the (non-trainable) prior constants.
struct NtmVars {
    ad::Var enc_w1, enc_b1, enc_w2, enc_b2, mu_w, mu_b, logvar_w, logvar_b;
    ad::Var topic_w, topic_b, beta_logits;
    double mu0 = 0.0;
    double sigma0 = 1.0;
};

struct StageMap;  // staging.hpp
NtmVars ntm_vars(const StageMap& staged, const NtmParams& p);
NtmVars stage_ntm(ad::Tape& tape, NtmParams& p, bool trainable = true);

struct Posterior {
    ad::Var mu, logvar;  // each T x 1
};

Posterior encode(ad::Tape& tape, const NtmVars& v, const Array& bow_col);
// theta = mu + exp(logvar/2) (*) eps; gradient flows to mu/logvar only.
ad::Var reparameterize(ad::Tape& tape, const Posterior& q, const Array& eps_col);
ad::Var topic_embed(ad::Tape& tape, const NtmVars& v, ad::Var theta);
ad::Var beta_from_logits(ad::Tape& tape, const NtmVars& v);  // row-softmax, T x D
// log p(d|t) = sum_n bow_n log(beta^T t)_n
ad::Var decode_loglik(ad::Tape& tape, ad::Var beta, ad::Var t, const Array& bow_col);
// KL(q || N(mu0, sigma0^2 I)), closed form, >= 0.
ad::Var kl_divergence(ad::Tape& tape, const Posterior& q, double mu0, double sigma0);
// R = phi - nu over the pairwise arccos-cosine angle matrix of beta rows.
// The default averages all T^2 ordered pairs (self-pairs contribute zero);
// off_diagonal restricts to the T^2 - T distinct pairs.
ad::Var diversity_regularizer(ad::Tape& tape, ad::Var beta, bool off_diagonal = false);

// Deterministic topic usage from the posterior mean (evaluation path).
Array topic_usage_mean(NtmParams& p, const Array& bow_col);

// Per-topic word ids ranked by beta descending, ties by id ascending.
std::vector<std::vector<int>> top_word_ids(const NtmParams& p, int k);

}  // namespace tcnlm
