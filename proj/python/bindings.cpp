#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <map>

#include "tcnlm/api.hpp"
#include "tcnlm/synthetic.hpp"

namespace py = pybind11;

namespace {

using Matrix = std::vector<std::vector<double>>;

tcnlm::Array to_array(const Matrix& m) {
    if (m.empty()) return {};
    const int rows = static_cast<int>(m.size());
    const int cols = static_cast<int>(m[0].size());
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(rows) * cols);
    for (const auto& row : m) {
        if (static_cast<int>(row.size()) != cols)
            throw tcnlm::ShapeError("ragged matrix");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return tcnlm::Array::from_data(rows, cols, std::move(flat));
}

Matrix from_array(const tcnlm::Array& a) {
    Matrix m(a.rows(), std::vector<double>(a.cols()));
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m[i][j] = a(i, j);
    return m;
}

tcnlm::Config config_with_overrides(const std::string& config,
                                    const std::map<std::string, std::string>& overrides) {
    tcnlm::Config cfg = tcnlm::resolve_config(config);
    for (const auto& [k, v] : overrides) tcnlm::apply_config_line(cfg, k, v);
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_tcnlm, m) {
    m.doc() = "Topic-compositional neural language model";

    m.def("tokenize", [](const std::string& text) { return tcnlm::tokenize(text); },
          py::arg("text"));

    m.def("parameter_count", &tcnlm::parameter_count, py::arg("n_f"), py::arg("n_x"),
          py::arg("T"), py::arg("n_h"),
          "Factored recurrence parameter count 4 n_f (n_x + 2T + 3 n_h)");

    m.def(
        "compose_weight",
        [](const Matrix& w_a, const Matrix& w_b, const Matrix& w_c,
           const std::vector<double>& t) {
            tcnlm::Array tv(static_cast<int>(t.size()), 1);
            for (size_t i = 0; i < t.size(); ++i) tv[static_cast<int>(i)] = t[i];
            return from_array(
                tcnlm::compose_weight(to_array(w_a), to_array(w_b), to_array(w_c), tv));
        },
        py::arg("w_a"), py::arg("w_b"), py::arg("w_c"), py::arg("t"),
        "Explicit topic-composed weight w_a diag(w_b t) w_c");

    m.def(
        "preprocess",
        [](const std::string& input, const std::string& out_dir, int lm_min_count,
           int tm_min_count, double tm_max_frac, int tm_min_doc_freq,
           const std::string& stopwords, int seq_cap, int max_paragraph_words, int dev_every) {
            tcnlm::api::PreprocessOptions o;
            o.input_path = input;
            o.out_dir = out_dir;
            o.vocab.lm_min_count = lm_min_count;
            o.vocab.tm_min_count = tm_min_count;
            o.vocab.tm_max_frac = tm_max_frac;
            o.vocab.tm_min_doc_freq = tm_min_doc_freq;
            o.stopwords_path = stopwords;
            o.corpus.seq_cap = seq_cap;
            o.corpus.max_paragraph_words = max_paragraph_words;
            o.dev_every = dev_every;
            const auto s = tcnlm::api::preprocess(o);
            py::dict d;
            d["d_lm"] = s.d_lm;
            d["d_tm"] = s.d_tm;
            d["paragraphs"] = s.paragraphs;
            d["train_instances"] = s.train_instances;
            d["dev_instances"] = s.dev_instances;
            return d;
        },
        py::arg("input"), py::arg("out_dir"), py::arg("lm_min_count") = 2,
        py::arg("tm_min_count") = 2, py::arg("tm_max_frac") = 0.001,
        py::arg("tm_min_doc_freq") = 2, py::arg("stopwords") = "", py::arg("seq_cap") = 30,
        py::arg("max_paragraph_words") = 300, py::arg("dev_every") = 10);

    m.def(
        "train",
        [](const std::string& data_dir, const std::string& config, const std::string& out_ckpt,
           const std::map<std::string, std::string>& overrides) {
            const auto out =
                tcnlm::api::train(data_dir, config_with_overrides(config, overrides), out_ckpt);
            py::dict d;
            d["best_dev_ppl"] = out.result.best_dev_ppl;
            d["best_epoch"] = out.result.best_epoch;
            d["log"] = out.log_text;
            return d;
        },
        py::arg("data_dir"), py::arg("config") = "toy", py::arg("out_ckpt"),
        py::arg("overrides") = std::map<std::string, std::string>{});

    m.def("evaluate", &tcnlm::api::evaluate, py::arg("ckpt"), py::arg("data_dir"),
          py::arg("split") = "dev", "Test perplexity of a checkpoint");

    m.def("topics", &tcnlm::api::topics, py::arg("ckpt"), py::arg("data_dir"),
          py::arg("top_k") = 10, "Top words per topic");

    m.def(
        "coherence",
        [](const std::string& ckpt, const std::string& data_dir, const std::string& ref,
           int window, double eps) {
            const auto out = tcnlm::api::coherence(ckpt, data_dir, ref, window, eps);
            py::dict d;
            d["coherence"] = out.report.coherence;
            d["text"] = out.text;
            return d;
        },
        py::arg("ckpt"), py::arg("data_dir"), py::arg("ref"), py::arg("window") = 10,
        py::arg("eps") = 1e-12);

    m.def(
        "generate",
        [](const std::string& ckpt, const std::string& data_dir, const std::vector<int>& topics,
           const std::vector<double>& weights, int max_len, bool sample, double temperature,
           uint64_t seed) {
            tcnlm::GenOptions o;
            o.max_len = max_len;
            o.sample = sample;
            o.temperature = temperature;
            o.seed = seed;
            return tcnlm::api::generate(ckpt, data_dir, topics,
                                        weights.empty() ? nullptr : &weights, o);
        },
        py::arg("ckpt"), py::arg("data_dir"), py::arg("topics"),
        py::arg("weights") = std::vector<double>{}, py::arg("max_len") = 30,
        py::arg("sample") = false, py::arg("temperature") = 1.0, py::arg("seed") = 0);

    m.def(
        "compare_moe",
        [](const std::string& data_dir, const std::string& config,
           const std::map<std::string, std::string>& overrides, const std::string& out_ckpt) {
            const auto out = tcnlm::api::compare_moe(
                data_dir, config_with_overrides(config, overrides), out_ckpt);
            py::dict d;
            d["basic_lstm"] = out.basic_ppl;
            d["naive_moe"] = out.moe_ppl;
            d["tcnlm"] = out.tcnlm_ppl;
            d["table"] = out.table;
            return d;
        },
        py::arg("data_dir"), py::arg("config") = "toy",
        py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("out_ckpt") = "");

    m.def(
        "synth_corpus",
        [](const std::string& out_path, int paragraphs, int sentences, uint64_t seed) {
            tcnlm::SyntheticSpec spec;
            spec.paragraphs = paragraphs;
            spec.sentences_per_paragraph = sentences;
            spec.seed = seed;
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw tcnlm::DataError("cannot write corpus: " + out_path);
            f << tcnlm::synthetic_corpus_text(spec);
        },
        py::arg("out_path"), py::arg("paragraphs") = 400, py::arg("sentences") = 3,
        py::arg("seed") = 7, "Write a two-topic synthetic corpus");
}
