#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcnlm/config.hpp"
#include "tcnlm/corpus.hpp"
#include "tcnlm/eval.hpp"
#include "tcnlm/generator.hpp"
#include "tcnlm/trainer.hpp"

namespace tcnlm::api {

// High-level pipeline entry points shared by the CLI and the python module.

struct PreprocessOptions {
    std::string input_path;
    std::string out_dir;
    VocabConfig vocab;          // stopwords filled from stopwords_path or the default list
    std::string stopwords_path;  // empty = bundled default list
    CorpusConfig corpus;
    int dev_every = 10;  // every Nth paragraph goes to the dev split
};

struct PreprocessSummary {
    int d_lm = 0;
    int d_tm = 0;
    int paragraphs = 0;
    int train_instances = 0;
    int dev_instances = 0;
};

// Writes vocab.txt, train.ins and dev.ins into out_dir. Deterministic:
// identical input and options give byte-identical files.
PreprocessSummary preprocess(const PreprocessOptions& opts);

struct DataSet {
    Vocabulary vocab;
    std::vector<TrainingInstance> train, dev;
};

DataSet load_dataset(const std::string& dir);

struct TrainOutcome {
    TrainResult result;
    std::string log_text;
};

TrainOutcome train(const std::string& data_dir, const Config& cfg, const std::string& out_ckpt);

double evaluate(const std::string& ckpt_path, const std::string& data_dir,
                const std::string& split = "dev");

std::vector<std::vector<std::string>> topics(const std::string& ckpt_path,
                                             const std::string& data_dir, int top_k);

struct CoherenceOutcome {
    CoherenceReport report;
    std::string text;  // "topic <i> n=<n> npmi <float>" lines plus "coherence <float>"
};

CoherenceOutcome coherence(const std::string& ckpt_path, const std::string& data_dir,
                           const std::string& ref_corpus_path, int window, double eps_c);

std::vector<std::string> generate(const std::string& ckpt_path, const std::string& data_dir,
                                  const std::vector<int>& topic_ids,
                                  const std::vector<double>* weights, const GenOptions& opts);

struct MoeComparison {
    double basic_ppl = 0.0;
    double moe_ppl = 0.0;
    double tcnlm_ppl = 0.0;
    std::string table;  // three-row report
};

// Trains the basic LSTM, the naive MoE and the TCNLM on the same data at
// matched hidden size and training budget; reports dev perplexities.
// When tcnlm_ckpt_out is nonempty the trained TCNLM is saved there.
MoeComparison compare_moe(const std::string& data_dir, const Config& cfg,
                          const std::string& tcnlm_ckpt_out = "");

}  // namespace tcnlm::api
