#include "tcnlm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "tcnlm/staging.hpp"

namespace tcnlm {

ad::Var elbo(ad::Tape& tape, const NtmVars& nv, const TclstmVars& lv, ad::Var beta,
             const TrainingInstance& inst, const Array& eps, const DropoutMasks* dropout,
             double kl_weight) {
    const Array bow = Array::from_counts(inst.context_bow);
    Posterior q = encode(tape, nv, bow);
    ad::Var theta = reparameterize(tape, q, eps);
    ad::Var t = topic_embed(tape, nv, theta);
    ad::Var rec = decode_loglik(tape, beta, t, bow);
    ad::Var kl = kl_divergence(tape, q, nv.mu0, nv.sigma0);
    ad::Var nll = sequence_nll(tape, lv, t, inst.target, dropout);
    // L = rec - kl_weight * KL - NLL
    return ad::sub(rec, ad::add(ad::scale(kl, kl_weight), nll));
}

namespace {

using StagedParams = std::vector<std::pair<std::string, ad::Var>>;

double kl_warmup_weight(const TrainConfig& cfg, int epoch) {
    if (cfg.kl_warmup_epochs <= 0) return 1.0;
    return std::min(1.0, static_cast<double>(epoch) / cfg.kl_warmup_epochs);
}

ad::Var mean_neg(ad::Tape& tape, const std::vector<ad::Var>& losses) {
    (void)tape;
    if (losses.empty()) throw DataError("objective: empty batch");
    ad::Var s = ad::scale(losses[0], -1.0);
    for (size_t i = 1; i < losses.size(); ++i) s = ad::sub(s, losses[i]);
    return ad::scale(s, 1.0 / static_cast<double>(losses.size()));
}

BatchObjective batch_objective_impl(ad::Tape& tape, TcnlmModel& model,
                                    const std::vector<const TrainingInstance*>& batch,
                                    const Config& cfg, RngStream& noise, bool training,
                                    int epoch, StagedParams* staged_out) {
    if (batch.empty()) throw DataError("objective: empty batch");
    StageMap sm = stage_all(tape, model, /*trainable=*/training);
    if (staged_out) *staged_out = sm.named;
    NtmVars nv = ntm_vars(sm, model.ntm);
    TclstmVars lv = tclstm_vars(sm, model.nlm);
    ad::Var beta = beta_from_logits(tape, nv);
    ad::Var r = diversity_regularizer(tape, beta, cfg.model.diversity_off_diagonal);
    const double klw = kl_warmup_weight(cfg.train, epoch);
    const bool use_dropout = training && cfg.train.dropout > 0.0;

    std::vector<ad::Var> losses;
    losses.reserve(batch.size());
    std::vector<DropoutMasks> masks;
    masks.reserve(batch.size());
    for (const TrainingInstance* inst : batch) {
        const Array eps =
            training ? noise.normal_array(model.ntm.T, 1) : Array(model.ntm.T, 1);
        const DropoutMasks* dm = nullptr;
        if (use_dropout) {
            masks.push_back(sample_dropout_masks(noise, model.layers,
                                                 static_cast<int>(inst->target.size()),
                                                 model.nlm.n_h, cfg.train.dropout));
            dm = &masks.back();
        }
        losses.push_back(elbo(tape, nv, lv, beta, *inst, eps, dm, klw));
    }
    ad::Var neg_l = mean_neg(tape, losses);
    ad::Var neg_j =
        cfg.train.lambda != 0.0 ? ad::sub(neg_l, ad::scale(r, cfg.train.lambda)) : neg_l;
    return {neg_j, -tape.value(neg_j)[0], tape.value(r)[0]};
}

}  // namespace

BatchObjective batch_objective(ad::Tape& tape, TcnlmModel& model,
                               const std::vector<const TrainingInstance*>& batch,
                               const Config& cfg, RngStream& noise, bool training, int epoch) {
    return batch_objective_impl(tape, model, batch, cfg, noise, training, epoch, nullptr);
}

double clip_global_norm(std::vector<Array>& grads, double clip) {
    if (clip <= 0.0) throw TrainError("clip_global_norm: clip must be positive");
    double sq = 0.0;
    for (const Array& g : grads)
        for (int i = 0; i < g.size(); ++i) sq += g[i] * g[i];
    const double norm = std::sqrt(sq);
    if (norm > clip) {
        const double f = clip / norm;
        for (Array& g : grads)
            for (int i = 0; i < g.size(); ++i) g[i] *= f;
    }
    return norm;
}

void adam_step(const std::vector<ParamRef>& params, const std::vector<Array>& grads,
               AdamState& state, const TrainConfig& cfg) {
    if (params.size() != grads.size()) throw TrainError("adam_step: params/grads size mismatch");
    for (size_t k = 0; k < params.size(); ++k) {
        if (!grads[k].all_finite())
            throw TrainError("diverged: gradient for " + params[k].name + " is not finite");
        if (!params[k].value->same_shape(grads[k]))
            throw TrainError("adam_step: gradient shape mismatch for " + params[k].name);
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t k = 0; k < params.size(); ++k) {
        Array& p = *params[k].value;
        const Array& g = grads[k];
        auto& [m, v] = state.moments[params[k].name];
        if (m.empty()) {
            m = Array(p.rows(), p.cols());
            v = Array(p.rows(), p.cols());
        }
        for (int i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            p[i] -= cfg.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
        }
    }
}

std::string format_epoch_line(const EpochLog& e) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "epoch %d J %.6f dev_ppl %.6f R %.6f", e.epoch, e.j,
                  e.dev_ppl, e.r);
    return buf;
}

namespace {

struct LoopOps {
    std::vector<ParamRef> params;
    std::function<ad::Var(ad::Tape&, const std::vector<const TrainingInstance*>&, RngStream&,
                          int epoch, double* j, double* r, StagedParams* staged)>
        neg_objective;
    std::function<double()> dev_ppl;
    std::function<double()> current_r;
    std::function<void()> on_best;
};

TrainResult train_loop(LoopOps& ops, const std::vector<TrainingInstance>& train_set,
                       const TrainConfig& cfg, std::ostream* log) {
    if (train_set.empty()) throw DataError("train: empty training set");
    if (cfg.batch_size < 1) throw DataError("train: batch_size must be >= 1");
    RngStream rng(cfg.seed);
    AdamState adam;
    TrainResult result;
    result.best_dev_ppl = std::numeric_limits<double>::infinity();

    std::vector<int> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    double last_dev = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double j_weighted = 0.0;
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<const TrainingInstance*> batch;
            batch.reserve(end - start);
            for (size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);

            ad::Tape tape;
            double j = 0.0, r = 0.0;
            StagedParams staged;
            ad::Var neg_j = ops.neg_objective(tape, batch, rng, epoch, &j, &r, &staged);
            j_weighted += j * static_cast<double>(batch.size());
            tape.backward(neg_j);

            std::unordered_map<std::string, ad::Var> by_name(staged.begin(), staged.end());
            std::vector<Array> grads;
            grads.reserve(ops.params.size());
            for (const ParamRef& p : ops.params) grads.push_back(tape.grad(by_name.at(p.name)));
            clip_global_norm(grads, cfg.clip_norm);
            adam_step(ops.params, grads, adam, cfg);
        }
        const double j_epoch = j_weighted / static_cast<double>(train_set.size());
        if (epoch % cfg.eval_every == 0 || epoch == 1 || epoch == cfg.epochs)
            last_dev = ops.dev_ppl();
        EpochLog entry{epoch, j_epoch, last_dev, ops.current_r()};
        result.log.push_back(entry);
        if (log) *log << format_epoch_line(entry) << "\n";
        if (last_dev < result.best_dev_ppl) {
            result.best_dev_ppl = last_dev;
            result.best_epoch = epoch;
            if (ops.on_best) ops.on_best();
        }
    }
    return result;
}

double current_diversity(NtmParams& ntm, bool off_diagonal) {
    ad::Tape tape;
    NtmVars nv = stage_ntm(tape, ntm, /*trainable=*/false);
    ad::Var beta = beta_from_logits(tape, nv);
    return tape.value(diversity_regularizer(tape, beta, off_diagonal))[0];
}

}  // namespace

TrainResult train_tcnlm(TcnlmModel& model, const std::vector<TrainingInstance>& train_set,
                        const std::vector<TrainingInstance>& dev_set, const Config& cfg,
                        std::ostream* log, const std::string* ckpt_path) {
    if (dev_set.empty()) throw DataError("train: empty dev set");
    LoopOps ops;
    ops.params = collect_params(model);
    ops.neg_objective = [&](ad::Tape& tape, const std::vector<const TrainingInstance*>& batch,
                            RngStream& rng, int epoch, double* j, double* r,
                            StagedParams* staged) {
        BatchObjective bo =
            batch_objective_impl(tape, model, batch, cfg, rng, /*training=*/true, epoch, staged);
        *j = bo.j_value;
        *r = bo.r_value;
        return bo.neg_j;
    };
    ops.dev_ppl = [&] { return perplexity(model, dev_set); };
    ops.current_r = [&] { return current_diversity(model.ntm, cfg.model.diversity_off_diagonal); };
    if (ckpt_path) ops.on_best = [&] { save_checkpoint(*ckpt_path, model); };
    return train_loop(ops, train_set, cfg.train, log);
}

TrainResult train_basic_lstm(LstmParams& model, const std::vector<TrainingInstance>& train_set,
                             const std::vector<TrainingInstance>& dev_set, const Config& cfg,
                             std::ostream* log) {
    if (dev_set.empty()) throw DataError("train: empty dev set");
    LoopOps ops;
    ops.params = collect_params(model);
    ops.neg_objective = [&](ad::Tape& tape, const std::vector<const TrainingInstance*>& batch,
                            RngStream& rng, int epoch, double* j, double* r,
                            StagedParams* staged) {
        (void)epoch;
        StageMap sm = stage_all(tape, model);
        if (staged) *staged = sm.named;
        LstmVars v = lstm_vars(sm, model);
        const bool use_dropout = cfg.train.dropout > 0.0;
        std::vector<ad::Var> losses;
        std::vector<DropoutMasks> masks;
        masks.reserve(batch.size());
        for (const TrainingInstance* inst : batch) {
            const DropoutMasks* dm = nullptr;
            if (use_dropout) {
                masks.push_back(sample_dropout_masks(
                    rng, 1, static_cast<int>(inst->target.size()), model.n_h,
                    cfg.train.dropout));
                dm = &masks.back();
            }
            // the "loss" convention here is log-likelihood, so negate the NLL
            losses.push_back(ad::scale(lstm_sequence_nll(tape, v, inst->target, dm), -1.0));
        }
        ad::Var neg = mean_neg(tape, losses);
        *j = -tape.value(neg)[0];
        *r = 0.0;
        return neg;
    };
    ops.dev_ppl = [&] { return perplexity_basic(model, dev_set); };
    ops.current_r = [] { return 0.0; };
    return train_loop(ops, train_set, cfg.train, log);
}

TrainResult train_naive_moe(NaiveMoeModel& model, const std::vector<TrainingInstance>& train_set,
                            const std::vector<TrainingInstance>& dev_set, const Config& cfg,
                            std::ostream* log) {
    if (dev_set.empty()) throw DataError("train: empty dev set");
    LoopOps ops;
    ops.params = collect_params(model);
    ops.neg_objective = [&](ad::Tape& tape, const std::vector<const TrainingInstance*>& batch,
                            RngStream& rng, int epoch, double* j, double* r,
                            StagedParams* staged) {
        StageMap sm = stage_all(tape, model);
        if (staged) *staged = sm.named;
        NtmVars nv = ntm_vars(sm, model.ntm);
        NaiveMoeVars mv = moe_vars(sm, model.moe);
        ad::Var beta = beta_from_logits(tape, nv);
        ad::Var rr = diversity_regularizer(tape, beta, cfg.model.diversity_off_diagonal);
        const double klw = kl_warmup_weight(cfg.train, epoch);
        std::vector<ad::Var> losses;
        for (const TrainingInstance* inst : batch) {
            const Array bow = Array::from_counts(inst->context_bow);
            const Array eps = rng.normal_array(model.ntm.T, 1);
            Posterior q = encode(tape, nv, bow);
            ad::Var theta = reparameterize(tape, q, eps);
            ad::Var t = topic_embed(tape, nv, theta);
            ad::Var rec = decode_loglik(tape, beta, t, bow);
            ad::Var kl = kl_divergence(tape, q, nv.mu0, nv.sigma0);
            ad::Var nll = moe_sequence_nll(tape, mv, t, inst->target);
            losses.push_back(ad::sub(rec, ad::add(ad::scale(kl, klw), nll)));
        }
        ad::Var neg_l = mean_neg(tape, losses);
        ad::Var neg_j =
            cfg.train.lambda != 0.0 ? ad::sub(neg_l, ad::scale(rr, cfg.train.lambda)) : neg_l;
        *j = -tape.value(neg_j)[0];
        *r = tape.value(rr)[0];
        return neg_j;
    };
    ops.dev_ppl = [&] { return perplexity_moe(model, dev_set); };
    ops.current_r = [&] { return current_diversity(model.ntm, cfg.model.diversity_off_diagonal); };
    return train_loop(ops, train_set, cfg.train, log);
}

}  // namespace tcnlm
