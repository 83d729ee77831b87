#include "tcnlm/synthetic.hpp"

#include <cstdio>

#include "tcnlm/rng.hpp"

namespace tcnlm {

std::string synthetic_topic_word(int topic, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%02d", topic == 0 ? "alpha" : "bravo", index);
    return buf;
}

std::string synthetic_shared_word(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sw%d", index);
    return buf;
}

std::string synthetic_corpus_text(const SyntheticSpec& spec) {
    RngStream rng(spec.seed);
    std::string out;
    for (int p = 0; p < spec.paragraphs; ++p) {
        const int topic = (p % 4) < 2 ? 0 : 1;  // interleaves topics across the dev stride
        for (int s = 0; s < spec.sentences_per_paragraph; ++s) {
            const int len = rng.uniform_int(spec.min_sentence_len, spec.max_sentence_len);
            for (int w = 0; w < len; ++w) {
                if (w) out += ' ';
                if (rng.uniform() < spec.shared_prob)
                    out += synthetic_shared_word(rng.uniform_int(0, spec.shared_words - 1));
                else
                    out += synthetic_topic_word(topic, rng.uniform_int(0, spec.topic_words - 1));
            }
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

}  // namespace tcnlm
