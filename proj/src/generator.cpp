#include "tcnlm/generator.hpp"

#include <cmath>

#include "tcnlm/rng.hpp"
#include "tcnlm/staging.hpp"

namespace tcnlm {

Array topic_mixture(const std::vector<int>& topic_ids, const std::vector<double>* weights,
                    int T) {
    if (topic_ids.empty()) throw DataError("topic_mixture: empty topic set");
    if (weights && weights->size() != topic_ids.size())
        throw DataError("topic_mixture: weights do not match topic ids");
    Array t(T, 1);
    double total = 0.0;
    for (size_t i = 0; i < topic_ids.size(); ++i) {
        const int id = topic_ids[i];
        if (id < 0 || id >= T)
            throw DataError("topic_mixture: topic id " + std::to_string(id) + " out of range");
        const double w = weights ? (*weights)[i] : 1.0;
        if (w <= 0.0) throw DataError("topic_mixture: weights must be positive");
        t(id, 0) += w;
        total += w;
    }
    for (int i = 0; i < T; ++i) t(i, 0) /= total;
    return t;
}

std::vector<std::string> generate_sentence(TcnlmModel& model, const Vocabulary& vocab,
                                           const Array& t, const GenOptions& opts) {
    if (opts.max_len < 1) throw DataError("generate_sentence: max_len must be >= 1");
    if (t.rows() != model.nlm.T || t.cols() != 1)
        throw ShapeError("generate_sentence: t " + t.shape_str() + " for T=" +
                         std::to_string(model.nlm.T));
    RngStream rng(opts.seed);

    ad::Tape tape;
    StageMap sm = stage_all(tape, model.nlm, /*trainable=*/false);
    TclstmVars lv = tclstm_vars(sm, model.nlm);
    ad::Var tv = tape.constant(t);
    const auto proj = project_topic(tape, lv, tv);
    const int n_h = model.nlm.n_h;
    std::vector<LstmState> state(model.nlm.layers.size());
    for (auto& s : state) {
        s.h = tape.constant(Array(n_h, 1));
        s.c = tape.constant(Array(n_h, 1));
    }

    std::vector<std::string> words;
    int prev = -1;  // <bos>
    for (int step = 0; step < opts.max_len; ++step) {
        ad::Var x = embedding_input(tape, lv.embeddings, lv.bos_embedding, prev);
        for (size_t l = 0; l < state.size(); ++l) {
            state[l] = tclstm_step(tape, lv, static_cast<int>(l), proj[l], x, state[l]);
            x = state[l].h;
        }
        const Array& p = tape.value(ad::softmax(ad::matmul(lv.v_out, x)));
        int next = -1;
        if (opts.sample) {
            // temperature sampling over non-reserved tokens plus <eos>
            std::vector<double> adj(p.rows(), 0.0);
            double z = 0.0;
            for (int i = 0; i < p.rows(); ++i) {
                if (i == kUnkId || i == kPadId) continue;
                adj[i] = std::pow(p(i, 0), 1.0 / opts.temperature);
                z += adj[i];
            }
            double u = rng.uniform() * z;
            for (int i = 0; i < p.rows(); ++i) {
                u -= adj[i];
                if (u <= 0.0 && adj[i] > 0.0) {
                    next = i;
                    break;
                }
            }
            if (next < 0) next = kEosId;
        } else {
            double best = -1.0;
            for (int i = 0; i < p.rows(); ++i) {
                if (i == kUnkId || i == kPadId) continue;
                if (p(i, 0) > best) {  // strict: ties keep the lowest id
                    best = p(i, 0);
                    next = i;
                }
            }
        }
        if (next == kEosId) break;
        words.push_back(vocab.lm_token(next));
        prev = next;
    }
    return words;
}

std::string format_generated(const std::vector<int>& topic_ids,
                             const std::vector<std::string>& words) {
    std::string line = "topic ";
    for (size_t i = 0; i < topic_ids.size(); ++i) {
        if (i) line += ',';
        line += std::to_string(topic_ids[i]);
    }
    line += ':';
    for (const auto& w : words) {
        line += ' ';
        line += w;
    }
    return line;
}

}  // namespace tcnlm
