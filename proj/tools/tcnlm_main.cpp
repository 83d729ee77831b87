#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcnlm/api.hpp"
#include "tcnlm/synthetic.hpp"

namespace {

std::vector<int> parse_id_list(const std::string& s) {
    std::vector<int> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::stoi(cur));
    return out;
}

std::vector<double> parse_weight_list(const std::string& s) {
    std::vector<double> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::stod(cur));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topic-compositional neural language model"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "tokenize a corpus and write vocab/instances");
    std::string pre_input, pre_out, pre_stopwords;
    tcnlm::api::PreprocessOptions popts;
    pre->add_option("input", pre_input, "input text file")->required();
    pre->add_option("--out", pre_out, "output directory")->required();
    pre->add_option("--lm-min-count", popts.vocab.lm_min_count, "minimum lm token count");
    pre->add_option("--tm-min-count", popts.vocab.tm_min_count, "minimum tm token count");
    pre->add_option("--tm-max-frac", popts.vocab.tm_max_frac,
                    "fraction of most frequent tokens excluded from tm vocab");
    pre->add_option("--tm-min-doc-freq", popts.vocab.tm_min_doc_freq,
                    "minimum documents containing a tm token");
    pre->add_option("--stopwords", pre_stopwords, "stopword file (default: bundled list)");
    pre->add_option("--seq-cap", popts.corpus.seq_cap, "sentence length cap including <eos>");
    pre->add_option("--max-paragraph-words", popts.corpus.max_paragraph_words,
                    "context bag-of-words word cap");
    pre->add_option("--dev-every", popts.dev_every, "every Nth paragraph goes to the dev split");

    // train
    auto* tr = app.add_subcommand("train", "train the joint model");
    std::string tr_data, tr_config = "toy", tr_out, tr_log;
    uint64_t tr_seed = 0;
    tr->add_option("--data", tr_data, "preprocessed data directory")->required();
    tr->add_option("--config", tr_config, "config file or preset (toy|small|large)");
    tr->add_option("--out", tr_out, "checkpoint output path")->required();
    tr->add_option("--log", tr_log, "training log path (default: <out>.log)");
    tr->add_option("--seed", tr_seed, "override the config seed");

    // eval
    auto* ev = app.add_subcommand("eval", "test perplexity of a checkpoint");
    std::string ev_ckpt, ev_data, ev_split = "dev";
    ev->add_option("--ckpt", ev_ckpt, "checkpoint path")->required();
    ev->add_option("--data", ev_data, "preprocessed data directory")->required();
    ev->add_option("--split", ev_split, "instance split: dev or train");

    // topics
    auto* tp = app.add_subcommand("topics", "print the top words of each topic");
    std::string tp_ckpt, tp_data;
    int tp_k = 10;
    tp->add_option("--ckpt", tp_ckpt, "checkpoint path")->required();
    tp->add_option("--data", tp_data, "preprocessed data directory")->required();
    tp->add_option("--top-k", tp_k, "words per topic");

    // coherence
    auto* co = app.add_subcommand("coherence", "NPMI topic coherence against a reference corpus");
    std::string co_ckpt, co_data, co_ref;
    int co_window = 10;
    double co_eps = 1e-12;
    co->add_option("--ckpt", co_ckpt, "checkpoint path")->required();
    co->add_option("--data", co_data, "preprocessed data directory")->required();
    co->add_option("--ref", co_ref, "reference corpus text file")->required();
    co->add_option("--window", co_window, "sliding window width");
    co->add_option("--eps", co_eps, "pair count smoothing");

    // generate
    auto* ge = app.add_subcommand("generate", "greedy topic-conditioned generation");
    std::string ge_ckpt, ge_data, ge_topics, ge_weights;
    int ge_max_len = 30;
    bool ge_sample = false;
    double ge_temperature = 1.0;
    uint64_t ge_seed = 0;
    ge->add_option("--ckpt", ge_ckpt, "checkpoint path")->required();
    ge->add_option("--data", ge_data, "preprocessed data directory")->required();
    ge->add_option("--topics", ge_topics, "comma-separated topic ids (default: each topic)");
    ge->add_option("--weights", ge_weights, "comma-separated positive mixture weights");
    ge->add_option("--max-len", ge_max_len, "maximum sentence length");
    ge->add_flag("--sample", ge_sample, "temperature sampling instead of greedy argmax");
    ge->add_option("--temperature", ge_temperature, "sampling temperature");
    ge->add_option("--seed", ge_seed, "sampling seed");

    // compare-moe
    auto* cm = app.add_subcommand(
        "compare-moe", "train basic LSTM, naive MoE and TCNLM at a matched budget");
    std::string cm_data, cm_config = "toy", cm_ckpt_out;
    uint64_t cm_seed = 0;
    cm->add_option("--data", cm_data, "preprocessed data directory")->required();
    cm->add_option("--config", cm_config, "config file or preset");
    cm->add_option("--out-ckpt", cm_ckpt_out, "optionally save the trained TCNLM checkpoint");
    cm->add_option("--seed", cm_seed, "override the config seed");

    // synth
    auto* sy = app.add_subcommand("synth", "write a two-topic synthetic corpus");
    tcnlm::SyntheticSpec spec;
    std::string sy_out;
    sy->add_option("--out", sy_out, "output text file")->required();
    sy->add_option("--paragraphs", spec.paragraphs, "paragraph count");
    sy->add_option("--sentences", spec.sentences_per_paragraph, "sentences per paragraph");
    sy->add_option("--seed", spec.seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (pre->parsed()) {
            popts.input_path = pre_input;
            popts.out_dir = pre_out;
            popts.stopwords_path = pre_stopwords;
            const auto s = tcnlm::api::preprocess(popts);
            std::printf("D_lm %d D %d paragraphs %d train_instances %d dev_instances %d\n",
                        s.d_lm, s.d_tm, s.paragraphs, s.train_instances, s.dev_instances);
        } else if (tr->parsed()) {
            tcnlm::Config cfg = tcnlm::resolve_config(tr_config);
            if (tr->count("--seed")) cfg.train.seed = tr_seed;
            const auto out = tcnlm::api::train(tr_data, cfg, tr_out);
            std::fputs(out.log_text.c_str(), stdout);
            std::printf("best_dev_ppl %.6f epoch %d\n", out.result.best_dev_ppl,
                        out.result.best_epoch);
            const std::string log_path = tr_log.empty() ? tr_out + ".log" : tr_log;
            std::ofstream lf(log_path, std::ios::binary);
            if (!lf) throw tcnlm::DataError("cannot write log: " + log_path);
            lf << out.log_text;
        } else if (ev->parsed()) {
            std::printf("ppl %.6f\n", tcnlm::api::evaluate(ev_ckpt, ev_data, ev_split));
        } else if (tp->parsed()) {
            const auto topics = tcnlm::api::topics(tp_ckpt, tp_data, tp_k);
            for (size_t t = 0; t < topics.size(); ++t) {
                std::printf("topic %zu:", t);
                for (const auto& w : topics[t]) std::printf(" %s", w.c_str());
                std::printf("\n");
            }
        } else if (co->parsed()) {
            const auto out = tcnlm::api::coherence(co_ckpt, co_data, co_ref, co_window, co_eps);
            std::fputs(out.text.c_str(), stdout);
        } else if (ge->parsed()) {
            tcnlm::GenOptions opts;
            opts.max_len = ge_max_len;
            opts.sample = ge_sample;
            opts.temperature = ge_temperature;
            opts.seed = ge_seed;
            std::vector<std::vector<int>> runs;
            if (ge_topics.empty()) {
                const auto model = tcnlm::load_checkpoint(ge_ckpt);
                for (int t = 0; t < model.nlm.T; ++t) runs.push_back({t});
            } else {
                runs.push_back(parse_id_list(ge_topics));
            }
            std::vector<double> weights;
            if (!ge_weights.empty()) weights = parse_weight_list(ge_weights);
            for (const auto& ids : runs) {
                const auto words = tcnlm::api::generate(
                    ge_ckpt, ge_data, ids, weights.empty() ? nullptr : &weights, opts);
                std::printf("%s\n", tcnlm::format_generated(ids, words).c_str());
            }
        } else if (cm->parsed()) {
            tcnlm::Config cfg = tcnlm::resolve_config(cm_config);
            if (cm->count("--seed")) cfg.train.seed = cm_seed;
            const auto out = tcnlm::api::compare_moe(cm_data, cfg, cm_ckpt_out);
            std::fputs(out.table.c_str(), stdout);
        } else if (sy->parsed()) {
            std::ofstream f(sy_out, std::ios::binary);
            if (!f) throw tcnlm::DataError("cannot write corpus: " + sy_out);
            f << tcnlm::synthetic_corpus_text(spec);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
