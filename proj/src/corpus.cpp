#include "tcnlm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace tcnlm {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_blank(const std::string& line) {
    for (char c : line)
        if (!is_space(c)) return false;
    return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        size_t j = i;
        while (j < n && !is_space(text[j])) ++j;
        if (j > i) {
            std::string chunk;
            chunk.reserve(j - i);
            for (size_t k = i; k < j; ++k) chunk.push_back(lower(text[k]));
            size_t b = 0, e = chunk.size();
            while (b < e && is_punct(chunk[b])) out.emplace_back(1, chunk[b++]);
            size_t tail = e;
            while (tail > b && is_punct(chunk[tail - 1])) --tail;
            if (tail > b) out.push_back(chunk.substr(b, tail - b));
            for (size_t k = tail; k < e; ++k) out.emplace_back(1, chunk[k]);
        }
        i = j;
    }
    return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& docs,
                             const VocabConfig& cfg) {
    Vocabulary v;
    for (const auto& doc : docs) {
        std::unordered_set<std::string> seen;
        for (const auto& tok : doc) {
            ++v.counts_[tok];
            if (seen.insert(tok).second) ++v.doc_freqs_[tok];
        }
    }

    // Eligible tokens ordered by count descending, ties lexicographic.
    std::vector<std::string> eligible;
    for (const auto& [tok, cnt] : v.counts_)
        if (cnt >= cfg.lm_min_count) eligible.push_back(tok);
    std::sort(eligible.begin(), eligible.end(), [&](const std::string& a, const std::string& b) {
        const long long ca = v.counts_.at(a), cb = v.counts_.at(b);
        if (ca != cb) return ca > cb;
        return a < b;
    });

    v.lm_tokens_ = {kUnkToken, kEosToken, kPadToken};
    v.lm_tokens_.insert(v.lm_tokens_.end(), eligible.begin(), eligible.end());

    const std::unordered_set<std::string> stop(cfg.stopwords.begin(), cfg.stopwords.end());
    const size_t n_top = static_cast<size_t>(cfg.tm_max_frac * static_cast<double>(eligible.size()));
    for (size_t r = 0; r < eligible.size(); ++r) {
        const std::string& tok = eligible[r];
        if (r < n_top) continue;  // most frequent excluded
        if (v.counts_.at(tok) < cfg.tm_min_count) continue;
        if (stop.count(tok)) continue;
        if (v.doc_freqs_.at(tok) < cfg.tm_min_doc_freq) continue;
        v.tm_tokens_.push_back(tok);
    }
    if (v.tm_tokens_.empty()) throw DataError("empty topic vocabulary");

    v.reindex();
    return v;
}

void Vocabulary::reindex() {
    lm_index_.clear();
    tm_index_.clear();
    for (size_t i = 0; i < lm_tokens_.size(); ++i) lm_index_[lm_tokens_[i]] = static_cast<int>(i);
    for (size_t i = 0; i < tm_tokens_.size(); ++i) tm_index_[tm_tokens_[i]] = static_cast<int>(i);
}

int Vocabulary::lm_id(const std::string& token) const {
    auto it = lm_index_.find(token);
    return it == lm_index_.end() ? kUnkId : it->second;
}

int Vocabulary::tm_id(const std::string& token) const {
    auto it = tm_index_.find(token);
    return it == tm_index_.end() ? -1 : it->second;
}

const std::string& Vocabulary::lm_token(int id) const {
    if (id < 0 || id >= lm_size()) throw DataError("lm token id out of range");
    return lm_tokens_[id];
}

const std::string& Vocabulary::tm_token(int id) const {
    if (id < 0 || id >= tm_size()) throw DataError("tm token id out of range");
    return tm_tokens_[id];
}

long long Vocabulary::count(const std::string& token) const {
    auto it = counts_.find(token);
    return it == counts_.end() ? 0 : it->second;
}

int Vocabulary::doc_freq(const std::string& token) const {
    auto it = doc_freqs_.find(token);
    return it == doc_freqs_.end() ? 0 : it->second;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
    if (!out) throw DataError("cannot write vocabulary file: " + path);
    out << "TCNLM-VOCAB-1\n" << lm_size() << "\n" << tm_size() << "\n";
    for (const auto& t : lm_tokens_) out << t << "\n";
    for (const auto& t : tm_tokens_) out << t << "\n";
    if (!out) throw DataError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary file: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "TCNLM-VOCAB-1") throw DataError("bad vocabulary magic in " + path);
    std::string line;
    std::getline(in, line);
    const int d_lm = std::stoi(line);
    std::getline(in, line);
    const int d_tm = std::stoi(line);
    Vocabulary v;
    v.lm_tokens_.reserve(d_lm);
    v.tm_tokens_.reserve(d_tm);
    for (int i = 0; i < d_lm; ++i) {
        if (!std::getline(in, line)) throw DataError("truncated vocabulary file: " + path);
        v.lm_tokens_.push_back(line);
    }
    for (int i = 0; i < d_tm; ++i) {
        if (!std::getline(in, line)) throw DataError("truncated vocabulary file: " + path);
        v.tm_tokens_.push_back(line);
    }
    if (v.lm_tokens_.size() < kNumReserved || v.lm_tokens_[kUnkId] != kUnkToken ||
        v.lm_tokens_[kEosId] != kEosToken || v.lm_tokens_[kPadId] != kPadToken)
        throw DataError("vocabulary file missing reserved tokens: " + path);
    v.reindex();
    return v;
}

std::vector<int> to_bow(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    std::vector<int> bow(vocab.tm_size(), 0);
    for (const auto& tok : tokens) {
        const int id = vocab.tm_id(tok);
        if (id >= 0) ++bow[id];
    }
    return bow;
}

std::vector<int> to_sequence(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                             int seq_cap) {
    const size_t max_words = seq_cap > 0 ? static_cast<size_t>(seq_cap - 1) : tokens.size();
    std::vector<int> ids;
    ids.reserve(std::min(tokens.size(), max_words) + 1);
    for (size_t i = 0; i < tokens.size() && i < max_words; ++i)
        ids.push_back(vocab.lm_id(tokens[i]));
    ids.push_back(kEosId);
    return ids;
}

std::vector<Paragraph> read_paragraphs(std::istream& in) {
    std::vector<Paragraph> paragraphs;
    Paragraph current;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) {
            if (!current.empty()) paragraphs.push_back(std::move(current));
            current.clear();
            continue;
        }
        auto toks = tokenize(line);
        if (!toks.empty()) current.push_back(std::move(toks));
    }
    if (!current.empty()) paragraphs.push_back(std::move(current));
    return paragraphs;
}

std::vector<Paragraph> read_paragraphs_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    return read_paragraphs(in);
}

std::vector<std::string> paragraph_tokens(const Paragraph& p) {
    std::vector<std::string> flat;
    for (const auto& s : p) flat.insert(flat.end(), s.begin(), s.end());
    return flat;
}

Document make_document(const Paragraph& p, const Vocabulary& vocab, const CorpusConfig& cfg) {
    Document d;
    d.sentences.reserve(p.size());
    for (const auto& s : p) d.sentences.push_back(to_sequence(s, vocab, cfg.seq_cap));
    d.bow = to_bow(paragraph_tokens(p), vocab);
    return d;
}

std::vector<TrainingInstance> make_instances(const Paragraph& p, const Vocabulary& vocab,
                                             const CorpusConfig& cfg) {
    if (p.empty()) throw DataError("make_instances: empty paragraph");
    std::vector<TrainingInstance> out;
    out.reserve(p.size());
    for (size_t i = 0; i < p.size(); ++i) {
        TrainingInstance inst;
        inst.target = to_sequence(p[i], vocab, cfg.seq_cap);
        std::vector<std::string> context;
        for (size_t j = 0; j < p.size(); ++j) {
            if (j == i) continue;
            for (const auto& tok : p[j]) {
                if (static_cast<int>(context.size()) >= cfg.max_paragraph_words) break;
                context.push_back(tok);
            }
            if (static_cast<int>(context.size()) >= cfg.max_paragraph_words) break;
        }
        inst.context_bow = to_bow(context, vocab);
        out.push_back(std::move(inst));
    }
    return out;
}

void save_instances(const std::string& path, const std::vector<TrainingInstance>& instances) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write instance file: " + path);
    for (const auto& inst : instances) {
        for (size_t i = 0; i < inst.target.size(); ++i) {
            if (i) out << ' ';
            out << inst.target[i];
        }
        out << '\t';
        bool first = true;
        for (size_t id = 0; id < inst.context_bow.size(); ++id) {
            if (inst.context_bow[id] == 0) continue;
            if (!first) out << ' ';
            out << id << ':' << inst.context_bow[id];
            first = false;
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<TrainingInstance> load_instances(const std::string& path, int tm_vocab_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open instance file: " + path);
    std::vector<TrainingInstance> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": missing tab separator");
        TrainingInstance inst;
        inst.context_bow.assign(tm_vocab_size, 0);
        {
            std::istringstream ids(line.substr(0, tab));
            int id;
            while (ids >> id) inst.target.push_back(id);
        }
        if (inst.target.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty target sequence");
        {
            std::istringstream bows(line.substr(tab + 1));
            std::string pair;
            while (bows >> pair) {
                const size_t colon = pair.find(':');
                if (colon == std::string::npos)
                    throw DataError(path + ":" + std::to_string(lineno) + ": bad bow pair " + pair);
                const int id = std::stoi(pair.substr(0, colon));
                const int cnt = std::stoi(pair.substr(colon + 1));
                if (id < 0 || id >= tm_vocab_size)
                    throw DataError(path + ":" + std::to_string(lineno) + ": bow id out of range");
                inst.context_bow[id] = cnt;
            }
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open stopword file: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!is_blank(line)) words.push_back(line);
    }
    return words;
}

const std::vector<std::string>& default_stopwords() {
    // Mirrors data/stopwords_en.txt.
    static const std::vector<std::string> words = {
        "a",     "an",    "and",   "are",   "as",    "at",    "be",    "but",  "by",   "for",
        "from",  "had",   "has",   "have",  "he",    "her",   "his",   "i",    "if",   "in",
        "is",    "it",    "its",   "my",    "no",    "not",   "of",    "on",   "or",   "our",
        "she",   "so",    "that",  "the",   "their", "them",  "then",  "there", "they", "this",
        "to",    "was",   "we",    "were",  "what",  "when",  "which", "who",  "will", "with",
        "would", "you",   "your"};
    return words;
}

}  // namespace tcnlm
