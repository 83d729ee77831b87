#include "tcnlm/ntm.hpp"

#include <algorithm>
#include <cmath>

#include "tcnlm/staging.hpp"

namespace tcnlm {

NtmParams NtmParams::init(int D, const ModelConfig& cfg, RngStream& rng) {
    NtmParams p;
    p.D = D;
    p.T = cfg.T;
    p.mu0 = cfg.mu0;
    p.sigma0 = cfg.sigma0;
    const int h1 = cfg.enc_hidden1, h2 = cfg.enc_hidden2;
    p.enc_w1 = rng.normal_array(h1, D, 1.0 / std::sqrt(static_cast<double>(D)));
    p.enc_b1 = Array(h1, 1);
    p.enc_w2 = rng.normal_array(h2, h1, 1.0 / std::sqrt(static_cast<double>(h1)));
    p.enc_b2 = Array(h2, 1);
    p.mu_w = rng.normal_array(cfg.T, h2, 1.0 / std::sqrt(static_cast<double>(h2)));
    p.mu_b = Array(cfg.T, 1);
    p.logvar_w = rng.normal_array(cfg.T, h2, 1.0 / std::sqrt(static_cast<double>(h2)));
    // start with a confident posterior (sigma ~ 0.37) so the encoder mean,
    // not the reparameterization noise, controls t early in training
    p.logvar_b = Array(cfg.T, 1, -2.0);
    p.topic_w = rng.uniform_array(cfg.T, cfg.T, -0.5, 0.5);
    p.topic_b = Array(cfg.T, 1);
    p.beta_logits = rng.uniform_array(cfg.T, D, -0.05, 0.05);
    return p;
}

void NtmParams::for_each(const std::function<void(const std::string&, Array&)>& fn) {
    fn("ntm/enc_w1", enc_w1);
    fn("ntm/enc_b1", enc_b1);
    fn("ntm/enc_w2", enc_w2);
    fn("ntm/enc_b2", enc_b2);
    fn("ntm/mu_w", mu_w);
    fn("ntm/mu_b", mu_b);
    fn("ntm/logvar_w", logvar_w);
    fn("ntm/logvar_b", logvar_b);
    fn("ntm/topic_w", topic_w);
    fn("ntm/topic_b", topic_b);
    fn("ntm/beta_logits", beta_logits);
}

NtmVars ntm_vars(const StageMap& staged, const NtmParams& p) {
    NtmVars v;
    v.mu0 = p.mu0;
    v.sigma0 = p.sigma0;
    v.enc_w1 = staged.at(p.enc_w1);
    v.enc_b1 = staged.at(p.enc_b1);
    v.enc_w2 = staged.at(p.enc_w2);
    v.enc_b2 = staged.at(p.enc_b2);
    v.mu_w = staged.at(p.mu_w);
    v.mu_b = staged.at(p.mu_b);
    v.logvar_w = staged.at(p.logvar_w);
    v.logvar_b = staged.at(p.logvar_b);
    v.topic_w = staged.at(p.topic_w);
    v.topic_b = staged.at(p.topic_b);
    v.beta_logits = staged.at(p.beta_logits);
    return v;
}

NtmVars stage_ntm(ad::Tape& tape, NtmParams& p, bool trainable) {
    return ntm_vars(stage_all(tape, p, trainable), p);
}

Posterior encode(ad::Tape& tape, const NtmVars& v, const Array& bow_col) {
    if (bow_col.cols() != 1 || bow_col.rows() != tape.value(v.enc_w1).cols())
        throw ShapeError("encode: bow " + bow_col.shape_str() + " does not match encoder input " +
                         std::to_string(tape.value(v.enc_w1).cols()));
    ad::Var x = tape.constant(bow_col);
    ad::Var h1 = ad::relu(ad::add(ad::matmul(v.enc_w1, x), v.enc_b1));
    ad::Var h2 = ad::relu(ad::add(ad::matmul(v.enc_w2, h1), v.enc_b2));
    Posterior q;
    q.mu = ad::add(ad::matmul(v.mu_w, h2), v.mu_b);
    q.logvar = ad::add(ad::matmul(v.logvar_w, h2), v.logvar_b);
    return q;
}

ad::Var reparameterize(ad::Tape& tape, const Posterior& q, const Array& eps_col) {
    if (!tape.value(q.mu).same_shape(eps_col))
        throw ShapeError("reparameterize: eps " + eps_col.shape_str() + " vs mu " +
                         tape.value(q.mu).shape_str());
    ad::Var sigma = ad::exp(ad::scale(q.logvar, 0.5));
    return ad::add(q.mu, ad::hadamard(sigma, tape.constant(eps_col)));
}

ad::Var topic_embed(ad::Tape& tape, const NtmVars& v, ad::Var theta) {
    (void)tape;
    return ad::softmax(ad::add(ad::matmul(v.topic_w, theta), v.topic_b));
}

ad::Var beta_from_logits(ad::Tape& tape, const NtmVars& v) {
    (void)tape;
    return ad::softmax(v.beta_logits);
}

ad::Var decode_loglik(ad::Tape& tape, ad::Var beta, ad::Var t, const Array& bow_col) {
    if (bow_col.cols() != 1 || bow_col.rows() != tape.value(beta).cols())
        throw ShapeError("decode_loglik: bow " + bow_col.shape_str() + " vs beta " +
                         tape.value(beta).shape_str());
    ad::Var word_probs = ad::matmul(ad::transpose(beta), t);  // D x 1, all > 0
    return ad::sum(ad::hadamard(tape.constant(bow_col), ad::log(word_probs)));
}

ad::Var kl_divergence(ad::Tape& tape, const Posterior& q, double mu0, double sigma0) {
    if (sigma0 <= 0.0) throw NumericError("kl_divergence: sigma0 must be positive");
    const int T = tape.value(q.mu).rows();
    const double s02 = sigma0 * sigma0;
    ad::Var var = ad::exp(q.logvar);
    ad::Var diff = ad::sub(q.mu, tape.constant(Array(T, 1, mu0)));
    ad::Var quad = ad::scale(ad::add(var, ad::hadamard(diff, diff)), 1.0 / s02);
    ad::Var core = ad::sub(ad::sum(quad), ad::sum(q.logvar));
    ad::Var constant = tape.constant(Array(1, 1, T * (std::log(s02) - 1.0)));
    return ad::scale(ad::add(core, constant), 0.5);
}

ad::Var diversity_regularizer(ad::Tape& tape, ad::Var beta, bool off_diagonal) {
    const int T = tape.value(beta).rows();
    if (T == 1 && off_diagonal) return tape.constant(Array(1, 1, 0.0));
    ad::Var angles = ad::pairwise_angles(beta);
    const double denom = off_diagonal ? static_cast<double>(T) * T - T
                                      : static_cast<double>(T) * T;
    // nu = E[a^2] - phi^2; the diagonal is exactly zero so both averagings
    // share the same sums.
    ad::Var phi = ad::scale(ad::sum(angles), 1.0 / denom);
    ad::Var mean_sq = ad::scale(ad::sum(ad::hadamard(angles, angles)), 1.0 / denom);
    ad::Var nu = ad::sub(mean_sq, ad::hadamard(phi, phi));
    return ad::sub(phi, nu);
}

Array topic_usage_mean(NtmParams& p, const Array& bow_col) {
    ad::Tape tape;
    NtmVars v = stage_ntm(tape, p);
    Posterior q = encode(tape, v, bow_col);
    ad::Var t = topic_embed(tape, v, q.mu);  // eps = 0
    return tape.value(t);
}

std::vector<std::vector<int>> top_word_ids(const NtmParams& p, int k) {
    if (k < 1 || k > p.D) throw DataError("top_word_ids: k out of range");
    std::vector<std::vector<int>> out(p.T);
    std::vector<int> order(p.D);
    for (int t = 0; t < p.T; ++t) {
        for (int d = 0; d < p.D; ++d) order[d] = d;
        // beta row ranking equals logits ranking (softmax is monotone).
        const Array& bl = p.beta_logits;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (bl(t, a) != bl(t, b)) return bl(t, a) > bl(t, b);
            return a < b;
        });
        out[t].assign(order.begin(), order.begin() + k);
    }
    return out;
}

}  // namespace tcnlm
