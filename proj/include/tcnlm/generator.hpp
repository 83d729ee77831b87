#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcnlm/corpus.hpp"
#include "tcnlm/model.hpp"

namespace tcnlm {

// Topic usage vector from explicit topic ids: a single id gives a one-hot t
// (so the recurrence uses only that factor column); several ids give a
// convex mixture, uniform unless weights are supplied.
Array topic_mixture(const std::vector<int>& topic_ids, const std::vector<double>* weights, int T);

struct GenOptions {
    int max_len = 30;
    bool sample = false;       // default is greedy argmax decoding
    double temperature = 1.0;  // only used when sample is true
    uint64_t seed = 0;
};

// Starts from zero hidden state with the <bos> input and decodes until <eos>
// or max_len tokens. Ties break toward the lowest id; <unk> and <pad> are
// masked so the output never contains reserved tokens; <eos> is not part of
// the returned list. Dropout disabled.
std::vector<std::string> generate_sentence(TcnlmModel& model, const Vocabulary& vocab,
                                           const Array& t, const GenOptions& opts = {});

// "topic <ids>: w1 w2 ..." with ids comma-separated.
std::string format_generated(const std::vector<int>& topic_ids,
                             const std::vector<std::string>& words);

}  // namespace tcnlm
