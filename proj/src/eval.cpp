#include "tcnlm/eval.hpp"

#include <algorithm>
#include <cmath>

#include "tcnlm/staging.hpp"

namespace tcnlm {

double perplexity_from_totals(double total_nll, long long token_count) {
    if (token_count <= 0) throw DataError("perplexity: no tokens");
    return std::exp(total_nll / static_cast<double>(token_count));
}

namespace {

Array posterior_mean_usage(ad::Tape& tape, const NtmVars& nv, const Array& bow) {
    Posterior q = encode(tape, nv, bow);
    return tape.value(topic_embed(tape, nv, q.mu));
}

}  // namespace

double perplexity(TcnlmModel& model, const std::vector<TrainingInstance>& instances) {
    if (instances.empty()) throw DataError("perplexity: empty instance set");
    double total = 0.0;
    long long tokens = 0;
    for (const auto& inst : instances) {
        ad::Tape tape;
        StageMap sm = stage_all(tape, model, /*trainable=*/false);
        NtmVars nv = ntm_vars(sm, model.ntm);
        TclstmVars lv = tclstm_vars(sm, model.nlm);
        const Array t = posterior_mean_usage(tape, nv, Array::from_counts(inst.context_bow));
        ad::Var nll = sequence_nll(tape, lv, tape.constant(t), inst.target, nullptr);
        total += tape.value(nll)[0];
        tokens += static_cast<long long>(inst.target.size());
    }
    return perplexity_from_totals(total, tokens);
}

double perplexity_basic(LstmParams& model, const std::vector<TrainingInstance>& instances) {
    if (instances.empty()) throw DataError("perplexity: empty instance set");
    double total = 0.0;
    long long tokens = 0;
    for (const auto& inst : instances) {
        ad::Tape tape;
        LstmVars v = stage_lstm(tape, model, /*trainable=*/false);
        total += tape.value(lstm_sequence_nll(tape, v, inst.target, nullptr))[0];
        tokens += static_cast<long long>(inst.target.size());
    }
    return perplexity_from_totals(total, tokens);
}

double perplexity_moe(NaiveMoeModel& model, const std::vector<TrainingInstance>& instances) {
    if (instances.empty()) throw DataError("perplexity: empty instance set");
    double total = 0.0;
    long long tokens = 0;
    for (const auto& inst : instances) {
        ad::Tape tape;
        StageMap sm = stage_all(tape, model, /*trainable=*/false);
        NtmVars nv = ntm_vars(sm, model.ntm);
        NaiveMoeVars mv = moe_vars(sm, model.moe);
        const Array t = posterior_mean_usage(tape, nv, Array::from_counts(inst.context_bow));
        total += tape.value(moe_sequence_nll(tape, mv, tape.constant(t), inst.target))[0];
        tokens += static_cast<long long>(inst.target.size());
    }
    return perplexity_from_totals(total, tokens);
}

long long CooccurrenceStats::word_count(const std::string& w) const {
    auto it = ids_.find(w);
    if (it == ids_.end()) return 0;
    auto c = word_counts_.find(it->second);
    return c == word_counts_.end() ? 0 : c->second;
}

long long CooccurrenceStats::pair_count(const std::string& a, const std::string& b) const {
    auto ia = ids_.find(a), ib = ids_.find(b);
    if (ia == ids_.end() || ib == ids_.end()) return 0;
    const unsigned long long lo = std::min(ia->second, ib->second);
    const unsigned long long hi = std::max(ia->second, ib->second);
    auto it = pair_counts_.find((lo << 32) | hi);
    return it == pair_counts_.end() ? 0 : it->second;
}

int CooccurrenceStats::intern(const std::string& w) {
    auto [it, fresh] = ids_.emplace(w, static_cast<int>(ids_.size()));
    (void)fresh;
    return it->second;
}

void CooccurrenceStats::add_pair(int a, int b) {
    const unsigned long long lo = std::min(a, b);
    const unsigned long long hi = std::max(a, b);
    ++pair_counts_[(lo << 32) | hi];
}

CooccurrenceStats cooccurrence_stats(const std::vector<std::string>& tokens, int window) {
    if (window < 2) throw DataError("cooccurrence_stats: window must be >= 2");
    if (tokens.empty()) throw DataError("cooccurrence_stats: empty corpus");
    CooccurrenceStats stats;
    stats.window = window;
    std::vector<int> ids(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) ids[i] = stats.intern(tokens[i]);

    const size_t w = static_cast<size_t>(window);
    const size_t n_windows = tokens.size() <= w ? 1 : tokens.size() - w + 1;
    stats.total_windows = static_cast<long long>(n_windows);
    std::vector<int> uniq;
    for (size_t start = 0; start < n_windows; ++start) {
        const size_t end = std::min(start + w, tokens.size());
        uniq.assign(ids.begin() + start, ids.begin() + end);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (size_t i = 0; i < uniq.size(); ++i) {
            stats.add_word(uniq[i]);
            for (size_t j = i + 1; j < uniq.size(); ++j) stats.add_pair(uniq[i], uniq[j]);
        }
    }
    return stats;
}

double npmi(const std::string& w1, const std::string& w2, const CooccurrenceStats& stats,
            double eps_c) {
    const long long c1 = stats.word_count(w1);
    const long long c2 = stats.word_count(w2);
    if (c1 == 0) throw DataError("word not in reference statistics: " + w1);
    if (c2 == 0) throw DataError("word not in reference statistics: " + w2);
    const double W = static_cast<double>(stats.total_windows);
    const double p1 = c1 / W;
    const double p2 = c2 / W;
    const double p12 = (static_cast<double>(stats.pair_count(w1, w2)) + eps_c) / W;
    // grouped so the result is exactly symmetric in (w1, w2)
    const double value = (std::log(p12) - (std::log(p1) + std::log(p2))) / (-std::log(p12));
    return std::min(1.0, std::max(-1.0, value));
}

CoherenceReport topic_coherence(const NtmParams& params, const Vocabulary& vocab,
                                const CooccurrenceStats& stats, double eps_c) {
    static const int kTopN[4] = {5, 10, 15, 20};
    CoherenceReport report;
    const int max_n = std::min(20, params.D);
    const auto ranked = top_word_ids(params, max_n);
    double topic_sum = 0.0;
    for (int t = 0; t < params.T; ++t) {
        double per_topic = 0.0;
        for (int n : kTopN) {
            const int take = std::min(n, max_n);
            std::vector<std::string> words;
            for (int i = 0; i < take; ++i) {
                const std::string& w = vocab.tm_token(ranked[t][i]);
                if (stats.contains(w) && stats.word_count(w) > 0)
                    words.push_back(w);
                else
                    ++report.skipped_words;
            }
            double pair_sum = 0.0;
            int pairs = 0;
            for (size_t i = 0; i < words.size(); ++i)
                for (size_t j = i + 1; j < words.size(); ++j) {
                    pair_sum += npmi(words[i], words[j], stats, eps_c);
                    ++pairs;
                }
            const double score = pairs > 0 ? pair_sum / pairs : 0.0;
            report.lines.push_back({t, n, score});
            per_topic += score;
        }
        topic_sum += per_topic / 4.0;
    }
    report.coherence = topic_sum / params.T;
    return report;
}

double mean_offdiag_beta_cosine(const NtmParams& params) {
    if (params.T < 2) return 0.0;
    // beta rows via a stable row softmax of the logits
    Array beta = params.beta_logits;
    for (int t = 0; t < beta.rows(); ++t) {
        double mx = beta(t, 0);
        for (int d = 1; d < beta.cols(); ++d) mx = std::max(mx, beta(t, d));
        double z = 0.0;
        for (int d = 0; d < beta.cols(); ++d) {
            beta(t, d) = std::exp(beta(t, d) - mx);
            z += beta(t, d);
        }
        for (int d = 0; d < beta.cols(); ++d) beta(t, d) /= z;
    }
    std::vector<double> norm(params.T);
    for (int t = 0; t < params.T; ++t) {
        double s = 0.0;
        for (int d = 0; d < beta.cols(); ++d) s += beta(t, d) * beta(t, d);
        norm[t] = std::sqrt(s);
    }
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < params.T; ++i)
        for (int j = i + 1; j < params.T; ++j) {
            double d = 0.0;
            for (int k = 0; k < beta.cols(); ++k) d += beta(i, k) * beta(j, k);
            sum += d / (norm[i] * norm[j]);
            ++count;
        }
    return sum / count;
}

}  // namespace tcnlm
