#pragma once

#include <cstdint>
#include <string>

namespace tcnlm {

// Two-topic synthetic corpus: two disjoint topical vocabularies plus a small
// set of shared function words. Each paragraph draws all its sentences from
// one topic; tokens are mostly topical so the paragraph context identifies
// the topic. Output follows the corpus text layout (one sentence per line,
// blank line between paragraphs).
struct SyntheticSpec {
    int paragraphs = 400;
    int sentences_per_paragraph = 3;
    int topic_words = 30;      // per topic, disjoint
    int shared_words = 10;
    int min_sentence_len = 6;
    int max_sentence_len = 10;
    double shared_prob = 0.15;
    uint64_t seed = 7;
};

std::string synthetic_corpus_text(const SyntheticSpec& spec);

// Word surface forms, used by tests to check topic recovery.
std::string synthetic_topic_word(int topic, int index);
std::string synthetic_shared_word(int index);

}  // namespace tcnlm
