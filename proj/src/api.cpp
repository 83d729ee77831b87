#include "tcnlm/api.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tcnlm::api {

namespace fs = std::filesystem;

PreprocessSummary preprocess(const PreprocessOptions& opts) {
    auto paragraphs = read_paragraphs_file(opts.input_path);
    if (paragraphs.empty()) throw DataError("no paragraphs in " + opts.input_path);

    VocabConfig vcfg = opts.vocab;
    vcfg.stopwords = opts.stopwords_path.empty() ? default_stopwords()
                                                 : load_stopwords(opts.stopwords_path);

    std::vector<std::vector<std::string>> docs;
    docs.reserve(paragraphs.size());
    for (const auto& p : paragraphs) docs.push_back(paragraph_tokens(p));
    Vocabulary vocab = Vocabulary::build(docs, vcfg);

    std::vector<TrainingInstance> train_set, dev_set;
    const int stride = opts.dev_every;
    for (size_t i = 0; i < paragraphs.size(); ++i) {
        auto instances = make_instances(paragraphs[i], vocab, opts.corpus);
        const bool dev = stride > 0 && (static_cast<int>(i) % stride) == stride - 1;
        auto& sink = dev ? dev_set : train_set;
        for (auto& inst : instances) sink.push_back(std::move(inst));
    }

    fs::create_directories(opts.out_dir);
    vocab.save((fs::path(opts.out_dir) / "vocab.txt").string());
    save_instances((fs::path(opts.out_dir) / "train.ins").string(), train_set);
    save_instances((fs::path(opts.out_dir) / "dev.ins").string(), dev_set);

    PreprocessSummary s;
    s.d_lm = vocab.lm_size();
    s.d_tm = vocab.tm_size();
    s.paragraphs = static_cast<int>(paragraphs.size());
    s.train_instances = static_cast<int>(train_set.size());
    s.dev_instances = static_cast<int>(dev_set.size());
    return s;
}

DataSet load_dataset(const std::string& dir) {
    DataSet ds;
    ds.vocab = Vocabulary::load((fs::path(dir) / "vocab.txt").string());
    ds.train = load_instances((fs::path(dir) / "train.ins").string(), ds.vocab.tm_size());
    ds.dev = load_instances((fs::path(dir) / "dev.ins").string(), ds.vocab.tm_size());
    return ds;
}

TrainOutcome train(const std::string& data_dir, const Config& cfg, const std::string& out_ckpt) {
    DataSet ds = load_dataset(data_dir);
    RngStream rng(cfg.train.seed);
    TcnlmModel model = TcnlmModel::init(ds.vocab.lm_size(), ds.vocab.tm_size(), cfg.model, rng);
    std::ostringstream log;
    TrainOutcome out;
    out.result = train_tcnlm(model, ds.train, ds.dev, cfg, &log, &out_ckpt);
    out.log_text = log.str();
    return out;
}

double evaluate(const std::string& ckpt_path, const std::string& data_dir,
                const std::string& split) {
    DataSet ds = load_dataset(data_dir);
    TcnlmModel model = load_checkpoint(ckpt_path);
    if (model.ntm.D != ds.vocab.tm_size() || model.nlm.D_lm != ds.vocab.lm_size())
        throw DataError("checkpoint dimensions do not match the dataset vocabulary");
    if (split == "dev") return perplexity(model, ds.dev);
    if (split == "train") return perplexity(model, ds.train);
    throw DataError("unknown split: " + split);
}

std::vector<std::vector<std::string>> topics(const std::string& ckpt_path,
                                             const std::string& data_dir, int top_k) {
    DataSet ds = load_dataset(data_dir);
    TcnlmModel model = load_checkpoint(ckpt_path);
    if (model.ntm.D != ds.vocab.tm_size())
        throw DataError("checkpoint dimensions do not match the dataset vocabulary");
    auto ids = top_word_ids(model.ntm, top_k);
    std::vector<std::vector<std::string>> out(ids.size());
    for (size_t t = 0; t < ids.size(); ++t)
        for (int id : ids[t]) out[t].push_back(ds.vocab.tm_token(id));
    return out;
}

CoherenceOutcome coherence(const std::string& ckpt_path, const std::string& data_dir,
                           const std::string& ref_corpus_path, int window, double eps_c) {
    DataSet ds = load_dataset(data_dir);
    TcnlmModel model = load_checkpoint(ckpt_path);
    if (model.ntm.D != ds.vocab.tm_size())
        throw DataError("checkpoint dimensions do not match the dataset vocabulary");
    auto paragraphs = read_paragraphs_file(ref_corpus_path);
    std::vector<std::string> tokens;
    for (const auto& p : paragraphs)
        for (const auto& s : p) tokens.insert(tokens.end(), s.begin(), s.end());
    CooccurrenceStats stats = cooccurrence_stats(tokens, window);

    CoherenceOutcome out;
    out.report = topic_coherence(model.ntm, ds.vocab, stats, eps_c);
    std::string text;
    char buf[96];
    for (const auto& line : out.report.lines) {
        std::snprintf(buf, sizeof(buf), "topic %d n=%d npmi %.6f\n", line.topic, line.n,
                      line.npmi);
        text += buf;
    }
    std::snprintf(buf, sizeof(buf), "coherence %.6f\n", out.report.coherence);
    text += buf;
    out.text = std::move(text);
    return out;
}

std::vector<std::string> generate(const std::string& ckpt_path, const std::string& data_dir,
                                  const std::vector<int>& topic_ids,
                                  const std::vector<double>* weights, const GenOptions& opts) {
    DataSet ds = load_dataset(data_dir);
    TcnlmModel model = load_checkpoint(ckpt_path);
    if (model.nlm.D_lm != ds.vocab.lm_size())
        throw DataError("checkpoint dimensions do not match the dataset vocabulary");
    const Array t = topic_mixture(topic_ids, weights, model.nlm.T);
    return generate_sentence(model, ds.vocab, t, opts);
}

MoeComparison compare_moe(const std::string& data_dir, const Config& cfg,
                          const std::string& tcnlm_ckpt_out) {
    DataSet ds = load_dataset(data_dir);
    const int d_lm = ds.vocab.lm_size();
    const int d_tm = ds.vocab.tm_size();
    MoeComparison out;
    {
        RngStream rng(cfg.train.seed);
        LstmParams basic = LstmParams::init(d_lm, cfg.model, rng);
        out.basic_ppl = train_basic_lstm(basic, ds.train, ds.dev, cfg).best_dev_ppl;
    }
    {
        RngStream rng(cfg.train.seed);
        NaiveMoeModel moe;
        moe.ntm = NtmParams::init(d_tm, cfg.model, rng);
        moe.moe = NaiveMoeParams::init(d_lm, cfg.model, rng);
        out.moe_ppl = train_naive_moe(moe, ds.train, ds.dev, cfg).best_dev_ppl;
    }
    {
        RngStream rng(cfg.train.seed);
        TcnlmModel model = TcnlmModel::init(d_lm, d_tm, cfg.model, rng);
        const std::string* ckpt = tcnlm_ckpt_out.empty() ? nullptr : &tcnlm_ckpt_out;
        out.tcnlm_ppl = train_tcnlm(model, ds.train, ds.dev, cfg, nullptr, ckpt).best_dev_ppl;
    }
    char buf[64];
    std::string table = "model dev_ppl\n";
    std::snprintf(buf, sizeof(buf), "basic-lstm %.6f\n", out.basic_ppl);
    table += buf;
    std::snprintf(buf, sizeof(buf), "naive-moe %.6f\n", out.moe_ppl);
    table += buf;
    std::snprintf(buf, sizeof(buf), "tcnlm %.6f\n", out.tcnlm_ppl);
    table += buf;
    out.table = std::move(table);
    return out;
}

}  // namespace tcnlm::api
