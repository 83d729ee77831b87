#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tcnlm/error.hpp"

namespace tcnlm {

inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kEosToken = "<eos>";
inline constexpr const char* kPadToken = "<pad>";
inline constexpr int kUnkId = 0;
inline constexpr int kEosId = 1;
inline constexpr int kPadId = 2;
inline constexpr int kNumReserved = 3;

struct VocabConfig {
    int lm_min_count = 2;
    int tm_min_count = 2;
    double tm_max_frac = 0.001;  // fraction of most-frequent eligible tokens dropped from tm
    int tm_min_doc_freq = 2;
    std::vector<std::string> stopwords;
};

// Dual vocabulary: the language-model vocab carries the reserved tokens at
// fixed ids 0..2; the topic-model vocab is an independent filter (no reserved
// tokens, no stopwords). Both orderings are count-descending with
// lexicographic tie-break, so identical corpora give identical files.
class Vocabulary {
public:
    static Vocabulary build(const std::vector<std::vector<std::string>>& docs,
                            const VocabConfig& cfg);

    int lm_size() const { return static_cast<int>(lm_tokens_.size()); }
    int tm_size() const { return static_cast<int>(tm_tokens_.size()); }

    int lm_id(const std::string& token) const;  // kUnkId if absent
    int tm_id(const std::string& token) const;  // -1 if absent
    const std::string& lm_token(int id) const;
    const std::string& tm_token(int id) const;
    const std::vector<std::string>& lm_tokens() const { return lm_tokens_; }
    const std::vector<std::string>& tm_tokens() const { return tm_tokens_; }

    // Frequency metadata from build(); zero after load().
    long long count(const std::string& token) const;
    int doc_freq(const std::string& token) const;

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    void reindex();
    std::vector<std::string> lm_tokens_, tm_tokens_;
    std::unordered_map<std::string, int> lm_index_, tm_index_;
    std::unordered_map<std::string, long long> counts_;
    std::unordered_map<std::string, int> doc_freqs_;
};

// One paragraph as surface tokens, one inner vector per sentence.
using Paragraph = std::vector<std::vector<std::string>>;

struct Document {
    std::vector<std::vector<int>> sentences;  // lm ids, each ends with <eos>
    std::vector<int> bow;                     // tm counts over the whole paragraph
};

struct TrainingInstance {
    std::vector<int> target;       // lm ids, ends with <eos>
    std::vector<int> context_bow;  // tm counts from the paragraph's other sentences
};

struct CorpusConfig {
    int seq_cap = 30;
    int max_paragraph_words = 300;
};

// Lowercases, splits on whitespace, and peels leading/trailing punctuation
// into single-character tokens. Internal punctuation (hyphens, apostrophes)
// and digits are kept. ASCII-only case folding; deterministic.
std::vector<std::string> tokenize(std::string_view text);

std::vector<int> to_bow(const std::vector<std::string>& tokens, const Vocabulary& vocab);
std::vector<int> to_sequence(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                             int seq_cap);

// Input text layout: one sentence per line, blank line between paragraphs.
std::vector<Paragraph> read_paragraphs(std::istream& in);
std::vector<Paragraph> read_paragraphs_file(const std::string& path);

std::vector<std::string> paragraph_tokens(const Paragraph& p);

Document make_document(const Paragraph& p, const Vocabulary& vocab, const CorpusConfig& cfg);

// One instance per sentence; the context bow counts the other sentences'
// tokens, truncated to the first max_paragraph_words of that stream.
std::vector<TrainingInstance> make_instances(const Paragraph& p, const Vocabulary& vocab,
                                             const CorpusConfig& cfg);

// Instance file: one line per instance, "<target ids space-separated>\t<tm_id>:<count> ...".
void save_instances(const std::string& path, const std::vector<TrainingInstance>& instances);
std::vector<TrainingInstance> load_instances(const std::string& path, int tm_vocab_size);

std::vector<std::string> load_stopwords(const std::string& path);
const std::vector<std::string>& default_stopwords();

}  // namespace tcnlm
