#include <doctest.h>

#include <sstream>

#include "support/oracles.hpp"
#include "tcnlm/generator.hpp"
#include "tcnlm/synthetic.hpp"

using namespace tcnlm;

namespace {

ModelConfig gen_cfg() {
    ModelConfig cfg;
    cfg.T = 5;
    cfg.n_x = 3;
    cfg.n_h = 4;
    cfg.n_f = 3;
    cfg.enc_hidden1 = 4;
    cfg.enc_hidden2 = 4;
    return cfg;
}

Vocabulary tiny_vocab() {
    VocabConfig cfg;
    cfg.lm_min_count = 1;
    cfg.tm_min_count = 1;
    cfg.tm_max_frac = 0.0;
    cfg.tm_min_doc_freq = 1;
    return Vocabulary::build({{"red", "green", "blue", "cyan"}}, cfg);
}

}  // namespace

TEST_CASE("topic_mixture") {
    SUBCASE("single id is one-hot") {
        const Array t = topic_mixture({3}, nullptr, 5);
        for (int i = 0; i < 5; ++i) CHECK(t(i, 0) == (i == 3 ? 1.0 : 0.0));
    }
    SUBCASE("two ids without weights are uniform") {
        const Array t = topic_mixture({0, 1}, nullptr, 5);
        CHECK(t(0, 0) == 0.5);
        CHECK(t(1, 0) == 0.5);
        CHECK(t(2, 0) == 0.0);
    }
    SUBCASE("weights normalize") {
        const std::vector<double> w = {1.0, 3.0};
        const Array t = topic_mixture({0, 1}, &w, 5);
        CHECK(t(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(t(1, 0) == doctest::Approx(0.75).epsilon(1e-15));
    }
    SUBCASE("empty set errors") {
        CHECK_THROWS_AS(topic_mixture({}, nullptr, 5), DataError);
    }
    SUBCASE("bad ids and weights error") {
        CHECK_THROWS_AS(topic_mixture({7}, nullptr, 5), DataError);
        const std::vector<double> w = {1.0, -2.0};
        CHECK_THROWS_AS(topic_mixture({0, 1}, &w, 5), DataError);
    }
}

TEST_CASE("generate_sentence") {
    Vocabulary vocab = tiny_vocab();
    RngStream rng(1);
    TcnlmModel model = TcnlmModel::init(vocab.lm_size(), 4, gen_cfg(), rng);
    const Array t = topic_mixture({2}, nullptr, 5);

    SUBCASE("a model forcing <eos> first yields an empty sentence") {
        TcnlmModel m = model;
        m.nlm.v_out.fill(0.0);
        for (int j = 0; j < m.nlm.n_h; ++j) m.nlm.v_out(kEosId, j) = 3.0;
        CHECK(generate_sentence(m, vocab, t).empty());
    }
    SUBCASE("max_len caps the output") {
        TcnlmModel m = model;
        // strongly favor a non-eos token so generation never stops on its own
        m.nlm.v_out.fill(0.0);
        const int target = vocab.lm_id("red");
        for (int j = 0; j < m.nlm.n_h; ++j) m.nlm.v_out(target, j) = 3.0;
        GenOptions opts;
        opts.max_len = 1;
        const auto words = generate_sentence(m, vocab, t, opts);
        REQUIRE(words.size() == 1);
        CHECK(words[0] == "red");
        GenOptions longer;
        longer.max_len = 7;
        CHECK(generate_sentence(m, vocab, t, longer).size() == 7);
    }
    SUBCASE("deterministic given a fixed model and t") {
        const auto a = generate_sentence(model, vocab, t);
        const auto b = generate_sentence(model, vocab, t);
        CHECK(a == b);
    }
    SUBCASE("no reserved tokens appear, length bounded") {
        for (int topic = 0; topic < 5; ++topic) {
            const auto words =
                generate_sentence(model, vocab, topic_mixture({topic}, nullptr, 5));
            CHECK(words.size() <= 30);
            for (const auto& w : words) {
                CHECK(w != kUnkToken);
                CHECK(w != kEosToken);
                CHECK(w != kPadToken);
            }
        }
    }
    SUBCASE("sampled generation is deterministic per seed") {
        GenOptions opts;
        opts.sample = true;
        opts.temperature = 0.8;
        opts.seed = 42;
        const auto a = generate_sentence(model, vocab, t, opts);
        const auto b = generate_sentence(model, vocab, t, opts);
        CHECK(a == b);
    }
}

TEST_CASE("one-hot generation equals the explicitly composed recurrence") {
    Vocabulary vocab = tiny_vocab();
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        RngStream rng(seed);
        TcnlmModel model = TcnlmModel::init(vocab.lm_size(), 4, gen_cfg(), rng);
        const int k = static_cast<int>(seed % 5);
        const Array t = topic_mixture({static_cast<int>(k)}, nullptr, 5);
        const auto words = generate_sentence(model, vocab, t);

        // oracle: greedy decode through explicit W(e_k), U(e_k)
        std::vector<std::string> expect;
        Array h(model.nlm.n_h, 1), c(model.nlm.n_h, 1);
        int prev = -1;
        for (int step = 0; step < 30; ++step) {
            Array x(model.nlm.n_x, 1);
            for (int j = 0; j < model.nlm.n_x; ++j)
                x(j, 0) = prev < 0 ? model.nlm.bos_embedding(0, j)
                                   : model.nlm.embeddings(prev, j);
            oracle::explicit_tclstm_step(model.nlm.layers[0], model.nlm.candidate_tanh, t, x, h,
                                         c);
            const auto dist = oracle::softmax_col(matmul(model.nlm.v_out, h));
            int best = -1;
            double best_p = -1.0;
            for (int i = 0; i < static_cast<int>(dist.size()); ++i) {
                if (i == kUnkId || i == kPadId) continue;
                if (dist[i] > best_p) {
                    best_p = dist[i];
                    best = i;
                }
            }
            if (best == kEosId) break;
            expect.push_back(vocab.lm_token(best));
            prev = best;
        }
        CHECK(words == expect);
    }
}

TEST_CASE("format_generated") {
    CHECK(format_generated({1, 4}, {"a", "b"}) == "topic 1,4: a b");
    CHECK(format_generated({0}, {}) == "topic 0:");
}
