#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tcnlm/corpus.hpp"
#include "tcnlm/model.hpp"

namespace tcnlm {

struct NaiveMoeModel {
    NtmParams ntm;
    NaiveMoeParams moe;
    void for_each(const std::function<void(const std::string&, Array&)>& fn) {
        ntm.for_each(fn);
        moe.for_each(fn);
    }
};

// exp(total NLL / total predicted tokens).
double perplexity_from_totals(double total_nll, long long token_count);

// Test-time protocol: topic usage from the posterior mean (eps = 0),
// dropout disabled. Token count includes the <eos> target of each sentence.
double perplexity(TcnlmModel& model, const std::vector<TrainingInstance>& instances);
double perplexity_basic(LstmParams& model, const std::vector<TrainingInstance>& instances);
double perplexity_moe(NaiveMoeModel& model, const std::vector<TrainingInstance>& instances);

// Sliding-window co-occurrence statistics over a flat token stream. Every
// window position contributes one window; a word counts once per window
// containing it, a pair once per window containing both. A stream shorter
// than the window is a single window.
class CooccurrenceStats {
public:
    CooccurrenceStats() = default;
    int window = 10;
    long long total_windows = 0;

    bool contains(const std::string& w) const { return ids_.count(w) > 0; }
    long long word_count(const std::string& w) const;
    long long pair_count(const std::string& a, const std::string& b) const;

    // build helpers
    int intern(const std::string& w);
    void add_word(int id) { ++word_counts_[id]; }
    void add_pair(int a, int b);

private:
    std::unordered_map<std::string, int> ids_;
    std::unordered_map<int, long long> word_counts_;
    std::unordered_map<unsigned long long, long long> pair_counts_;
};

CooccurrenceStats cooccurrence_stats(const std::vector<std::string>& tokens, int window);

// Normalized PMI with additive smoothing eps_c on the pair count:
// p12 = (pair + eps_c) / W. Result clamped to [-1, 1]. Both words must have
// nonzero window counts.
double npmi(const std::string& w1, const std::string& w2, const CooccurrenceStats& stats,
            double eps_c = 1e-12);

struct CoherenceLine {
    int topic;
    int n;
    double npmi;
};

struct CoherenceReport {
    std::vector<CoherenceLine> lines;  // one per (topic, n)
    double coherence = 0.0;            // mean over topics of the per-topic mean over n
    int skipped_words = 0;             // top words missing from the reference stats
};

// Mean pairwise NPMI over the top-n topic words for n in {5,10,15,20}
// (n capped at the tm vocabulary size), averaged per topic and then over
// topics.
CoherenceReport topic_coherence(const NtmParams& params, const Vocabulary& vocab,
                                const CooccurrenceStats& stats, double eps_c = 1e-12);

// Mean cosine similarity between distinct beta rows (diversity diagnostics).
double mean_offdiag_beta_cosine(const NtmParams& params);

}  // namespace tcnlm
