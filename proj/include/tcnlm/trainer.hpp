#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcnlm/config.hpp"
#include "tcnlm/corpus.hpp"
#include "tcnlm/eval.hpp"
#include "tcnlm/model.hpp"

namespace tcnlm {

// Single-sample ELBO for one instance: the context bow drives both the
// encoder and the bag-of-words reconstruction, and the resulting t drives
// the sequence term, all on one tape so gradients flow jointly.
//   L = decode_loglik - kl_weight * KL - sequence NLL
ad::Var elbo(ad::Tape& tape, const NtmVars& nv, const TclstmVars& lv, ad::Var beta,
             const TrainingInstance& inst, const Array& eps, const DropoutMasks* dropout,
             double kl_weight = 1.0);

struct BatchObjective {
    ad::Var neg_j;    // minimized: mean(-L) - lambda R
    double j_value;   // J for the batch at current parameters
    double r_value;   // diversity regularizer value
};

// Draws eps (and dropout masks when training) from noise per instance in
// batch order; deterministic given the stream state.
BatchObjective batch_objective(ad::Tape& tape, TcnlmModel& model,
                               const std::vector<const TrainingInstance*>& batchb,
                               const Config& cfg, RngStream& noise, bool training, int epoch);

struct ParamRef {
    std::string name;
    Array* value;
};

template <typename M>
std::vector<ParamRef> collect_params(M& m) {
    std::vector<ParamRef> out;
    m.for_each([&](const std::string& n, Array& a) { out.push_back({n, &a}); });
    return out;
}

struct AdamState {
    std::unordered_map<std::string, std::pair<Array, Array>> moments;  // m, v
    long long step = 0;
};

// Scales all gradients by clip/norm when the global norm exceeds clip.
double clip_global_norm(std::vector<Array>& grads, double clip);

// Bias-corrected Adam update after global-norm clipping has been applied.
// Throws TrainError("diverged: ...") naming the first non-finite gradient.
void adam_step(const std::vector<ParamRef>& params, const std::vector<Array>& grads,
               AdamState& state, const TrainConfig& cfg);

struct EpochLog {
    int epoch;
    double j;
    double dev_ppl;
    double r;
};

struct TrainResult {
    std::vector<EpochLog> log;
    double best_dev_ppl = 0.0;
    int best_epoch = 0;
};

std::string format_epoch_line(const EpochLog& e);

// Joint training of NTM + TCLSTM by maximizing J = mean L + lambda R with
// Adam. Deterministic given cfg.train.seed. When ckpt_path is given the
// model with the best dev perplexity is written there (and at least once).
TrainResult train_tcnlm(TcnlmModel& model, const std::vector<TrainingInstance>& train_set,
                        const std::vector<TrainingInstance>& dev_set, const Config& cfg,
                        std::ostream* log = nullptr, const std::string* ckpt_path = nullptr);

// Baselines trained with the same loop: the basic LSTM maximizes the mean
// sequence log-likelihood only; the naive MoE maximizes the same J as the
// TCNLM with its expert mixture as the sequence term.
TrainResult train_basic_lstm(LstmParams& model, const std::vector<TrainingInstance>& train_set,
                             const std::vector<TrainingInstance>& dev_set, const Config& cfg,
                             std::ostream* log = nullptr);

TrainResult train_naive_moe(NaiveMoeModel& model, const std::vector<TrainingInstance>& train_set,
                            const std::vector<TrainingInstance>& dev_set, const Config& cfg,
                            std::ostream* log = nullptr);

}  // namespace tcnlm
