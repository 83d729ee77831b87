// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Criteria 5, 6 and 8 share three compare-moe CLI runs on the synthetic
// two-topic corpus.

#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "tcnlm/api.hpp"
#include "tcnlm/gradcheck.hpp"
#include "tcnlm/staging.hpp"
#include "tcnlm/synthetic.hpp"

using namespace tcnlm;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[acceptance] criterion %d: %s (%s)\n", criterion, ok ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& capture) {
    const std::string cmd =
        std::string(TCNLM_CLI_BIN) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ModelConfig micro_model() {
    ModelConfig cfg;
    cfg.T = 2;
    cfg.n_x = 2;
    cfg.n_h = 3;
    cfg.n_f = 2;
    cfg.enc_hidden1 = 4;
    cfg.enc_hidden2 = 4;
    return cfg;
}

// ---- shared synthetic-corpus comparison runs -------------------------------

struct MoeRun {
    double basic = 0.0, moe = 0.0, tcnlm = 0.0;
    double seconds = 0.0;
    fs::path ckpt;
};

struct SharedRuns {
    fs::path ws;
    std::vector<MoeRun> runs;  // seeds 1..3
    bool ok = false;
};

const SharedRuns& shared_runs() {
    static SharedRuns shared = [] {
        SharedRuns s;
        s.ws = fs::current_path() / "acceptance_ws";
        fs::remove_all(s.ws);
        fs::create_directories(s.ws);

        // synthetic corpus per the criterion: 2x30 topical words + 10 shared,
        // 400 paragraphs of 3 sentences
        {
            std::ofstream f(s.ws / "corpus.txt", std::ios::binary);
            f << synthetic_corpus_text(SyntheticSpec{});
        }
        if (run_cli("preprocess " + (s.ws / "corpus.txt").string() + " --out " +
                        (s.ws / "data").string() +
                        " --lm-min-count 1 --tm-min-count 1 --tm-min-doc-freq 1",
                    s.ws / "pre.txt") != 0)
            return s;

        for (uint64_t seed = 1; seed <= 3; ++seed) {
            MoeRun run;
            run.ckpt = s.ws / ("tcnlm_seed" + std::to_string(seed) + ".ckpt");
            const auto t0 = std::chrono::steady_clock::now();
            const fs::path out = s.ws / ("cmp" + std::to_string(seed) + ".txt");
            if (run_cli("compare-moe --data " + (s.ws / "data").string() +
                            " --config toy --seed " + std::to_string(seed) + " --out-ckpt " +
                            run.ckpt.string(),
                        out) != 0)
                return s;
            run.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::istringstream lines(read_file(out));
            std::string header;
            std::getline(lines, header);  // "model dev_ppl"
            std::string word;
            double val;
            while (lines >> word >> val) {
                if (word == "basic-lstm") run.basic = val;
                if (word == "naive-moe") run.moe = val;
                if (word == "tcnlm") run.tcnlm = val;
            }
            if (run.basic <= 0 || run.moe <= 0 || run.tcnlm <= 0) return s;
            s.runs.push_back(run);
        }
        s.ok = true;
        return s;
    }();
    return shared;
}

}  // namespace

TEST_CASE("criterion 1: gradient suite under 1e-4 in under 10 s") {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    RngStream rng(12345);

    // every primitive, interior points
    {
        std::vector<Array> p = {rng.uniform_array(3, 4, -1, 1), rng.uniform_array(4, 2, -1, 1),
                                rng.uniform_array(3, 1, -1, 1)};
        auto f = [](ad::Tape&, const std::vector<ad::Var>& v) {
            ad::Var lin = ad::add(ad::matmul(v[0], v[1]), v[2]);
            ad::Var act = ad::add(ad::sigmoid(lin), ad::tanh(ad::relu(lin)));
            ad::Var soft = ad::softmax(act);
            ad::Var mixed = ad::hadamard(soft, ad::exp(ad::scale(lin, 0.2)));
            return ad::sum(ad::log(ad::add(mixed, ad::exp(ad::scale(ad::transpose(
                                                      ad::transpose(lin)), 0.1)))));
        };
        worst = std::max(worst, ad::finite_diff_check(f, p, 1e-5, 1e-4).max_rel_err);
    }
    {
        std::vector<Array> p = {rng.uniform_array(6, 3, -1, 1), rng.uniform_array(1, 1, 0.2, 0.9),
                                rng.uniform_array(3, 5, 0.05, 1.0)};
        Array mask(2, 3);
        for (int i = 0; i < mask.size(); ++i) mask[i] = (i % 2) ? 0.0 : 2.0;
        auto f = [mask](ad::Tape&, const std::vector<ad::Var>& v) {
            ad::Var g = ad::gather_rows(v[0], {0, 4});
            ad::Var d = ad::dropout_mask(g, mask);
            ad::Var s = ad::smul(v[1], ad::sub(d, ad::scale(g, 0.5)));
            return ad::add(ad::sum(s), ad::sum(ad::pairwise_angles(v[2])));
        };
        worst = std::max(worst, ad::finite_diff_check(f, p, 1e-5, 1e-4).max_rel_err);
    }

    // the full -J objective on the micro configuration
    {
        Config cfg;
        cfg.model = micro_model();
        TcnlmModel proto = TcnlmModel::init(5, 4, cfg.model, rng);
        proto.for_each([&](const std::string&, Array& a) {
            a = rng.uniform_array(a.rows(), a.cols(), -0.5, 0.5);
        });
        TrainingInstance inst;
        inst.target = {3, 4, kEosId};
        inst.context_bow = {1, 0, 2, 1};
        const Array eps = rng.normal_array(2, 1);
        std::vector<Array> params;
        proto.for_each([&](const std::string&, Array& a) { params.push_back(a); });
        auto f = [&](ad::Tape& tape, const std::vector<ad::Var>& vars) {
            TcnlmModel m = proto;
            StageMap sm;
            size_t i = 0;
            m.for_each([&](const std::string&, Array& a) { sm.by_addr[&a] = vars[i++]; });
            NtmVars nv = ntm_vars(sm, m.ntm);
            TclstmVars lv = tclstm_vars(sm, m.nlm);
            ad::Var beta = beta_from_logits(tape, nv);
            ad::Var l = elbo(tape, nv, lv, beta, inst, eps, nullptr);
            return ad::sub(ad::scale(l, -1.0),
                           ad::scale(diversity_regularizer(tape, beta), cfg.train.lambda));
        };
        worst = std::max(worst, ad::finite_diff_check(f, params, 1e-5, 1e-4).max_rel_err);
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = worst < 1e-4 && secs < 10.0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max_rel_err %.3g, %.2f s", worst, secs);
    report(1, ok, detail);
    CHECK(worst < 1e-4);
    CHECK(secs < 10.0);
}

TEST_CASE("criterion 2: closed-form identities") {
    bool ok = true;

    ad::Tape t;
    Posterior q0{t.param(Array(3, 1, 0.0)), t.param(Array(3, 1, 0.0))};
    const double kl0 = t.value(kl_divergence(t, q0, 0.0, 1.0))[0];
    ok = ok && (kl0 == 0.0);
    CHECK(kl0 == 0.0);

    Posterior q1{t.param(Array::col({1.0})), t.param(Array::col({0.0}))};
    const double kl1 = t.value(kl_divergence(t, q1, 0.0, 1.0))[0];
    ok = ok && std::fabs(kl1 - 0.5) < 1e-12;
    CHECK(kl1 == doctest::Approx(0.5).epsilon(1e-12));

    ad::Var beta = t.param(Array::from_data(2, 4, {0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5}));
    const double r = t.value(diversity_regularizer(t, beta))[0];
    const double expect_r = kPi / 4 - kPi * kPi / 16;
    ok = ok && std::fabs(r - expect_r) < 1e-9;
    CHECK(r == doctest::Approx(expect_r).epsilon(1e-9));

    const long long count = parameter_count(4, 3, 2, 5);
    ok = ok && count == 352;
    CHECK(count == 352);
    ModelConfig alloc_cfg;
    alloc_cfg.n_f = 4;
    alloc_cfg.n_x = 3;
    alloc_cfg.T = 2;
    alloc_cfg.n_h = 5;
    RngStream rng(1);
    TclstmParams p = TclstmParams::init(3, alloc_cfg, rng);
    long long allocated = 0;
    for (const auto& g : p.layers[0].gates)
        allocated += g.w_a.size() + g.w_b.size() + g.w_c.size() + g.u_a.size() + g.u_b.size() +
                     g.u_c.size();
    ok = ok && allocated == count;
    CHECK(allocated == count);

    char detail[128];
    std::snprintf(detail, sizeof(detail), "KL0 %.1g, KL 0.5 err %.2g, R err %.2g, count %lld",
                  kl0, std::fabs(kl1 - 0.5), std::fabs(r - expect_r), count);
    report(2, ok, detail);
}

TEST_CASE("criterion 3: factorization equivalence over 100 seeds") {
    ModelConfig cfg;
    cfg.T = 2;
    cfg.n_x = 3;
    cfg.n_h = 4;
    cfg.n_f = 3;
    double worst = 0.0;
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        RngStream rng(seed);
        TclstmParams p = TclstmParams::init(5, cfg, rng);
        const int k = static_cast<int>(seed % 2);
        Array t(2, 1);
        t(k, 0) = 1.0;
        const Array x = rng.uniform_array(3, 1, -1, 1);
        Array h = rng.uniform_array(4, 1, -1, 1);
        Array c = rng.uniform_array(4, 1, -1, 1);

        ad::Tape tape;
        TclstmVars v = stage_tclstm(tape, p);
        const auto proj = project_topic(tape, v, tape.constant(t));
        LstmState prev{tape.constant(h), tape.constant(c)};
        LstmState s = tclstm_step(tape, v, 0, proj[0], tape.constant(x), prev);

        Array oh = h, oc = c;
        oracle::explicit_tclstm_step(p.layers[0], p.candidate_tanh, t, x, oh, oc);
        for (int i = 0; i < 4; ++i) {
            worst = std::max(worst, std::fabs(tape.value(s.h)(i, 0) - oh(i, 0)));
            worst = std::max(worst, std::fabs(tape.value(s.c)(i, 0) - oc(i, 0)));
        }
    }
    const bool ok = worst < 1e-12;
    char detail[64];
    std::snprintf(detail, sizeof(detail), "max coordinate diff %.3g", worst);
    report(3, ok, detail);
    CHECK(worst < 1e-12);
}

TEST_CASE("criterion 4: normalization over 1000 random evaluations") {
    RngStream rng(99);
    double worst = 0.0;
    double min_entry = 0.0;
    ModelConfig cfg = micro_model();

    for (int rep = 0; rep < 400; ++rep) {  // softmax over random logits
        ad::Tape t;
        const Array& p = t.value(ad::softmax(t.constant(rng.uniform_array(3, 7, -6, 6))));
        for (int i = 0; i < p.rows(); ++i) {
            double s = 0.0;
            for (int j = 0; j < p.cols(); ++j) {
                s += p(i, j);
                min_entry = std::min(min_entry, p(i, j));
            }
            worst = std::max(worst, std::fabs(s - 1.0));
        }
    }
    for (int rep = 0; rep < 300; ++rep) {  // beta^T t mixtures
        NtmParams p = NtmParams::init(6, cfg, rng);
        ad::Tape t;
        NtmVars v = stage_ntm(t, p);
        Posterior q = encode(t, v, rng.uniform_array(6, 1, 0.0, 4.0));
        ad::Var theta = reparameterize(t, q, rng.normal_array(2, 1));
        ad::Var mix = ad::matmul(ad::transpose(beta_from_logits(t, v)),
                                 topic_embed(t, v, theta));
        const Array& pr = t.value(mix);
        double s = 0.0;
        for (int i = 0; i < pr.size(); ++i) {
            s += pr[i];
            min_entry = std::min(min_entry, pr[i]);
        }
        worst = std::max(worst, std::fabs(s - 1.0));
    }
    for (int rep = 0; rep < 300; ++rep) {  // naive MoE mixtures
        NaiveMoeParams p = NaiveMoeParams::init(6, cfg, rng);
        ad::Tape t;
        NaiveMoeVars v = stage_moe(t, p);
        Array tv(2, 1);
        const double a = rng.uniform();
        tv(0, 0) = a;
        tv(1, 0) = 1.0 - a;
        std::vector<ad::Var> h0 = {t.constant(rng.uniform_array(3, 1, -1, 1)),
                                   t.constant(rng.uniform_array(3, 1, -1, 1))};
        MoeStep step = naive_moe_step(t, v, t.constant(tv),
                                      t.constant(rng.uniform_array(2, 1, -1, 1)), h0);
        const Array& pr = t.value(step.p);
        double s = 0.0;
        for (int i = 0; i < pr.size(); ++i) {
            s += pr[i];
            min_entry = std::min(min_entry, pr[i]);
        }
        worst = std::max(worst, std::fabs(s - 1.0));
    }

    const bool ok = worst < 1e-10 && min_entry >= 0.0;
    char detail[64];
    std::snprintf(detail, sizeof(detail), "max |sum-1| %.3g", worst);
    report(4, ok, detail);
    CHECK(worst < 1e-10);
    CHECK(min_entry >= 0.0);
}

TEST_CASE("criterion 5: TCNLM beats the basic LSTM by 5% on 3 of 3 seeds") {
    const SharedRuns& s = shared_runs();
    REQUIRE(s.ok);
    bool ok = true;
    std::string detail;
    for (const auto& run : s.runs) {
        const bool margin = run.tcnlm <= 0.95 * run.basic;
        const bool timely = run.seconds < 600.0;
        ok = ok && margin && timely;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "[basic %.2f tcnlm %.2f %.0f s] ", run.basic, run.tcnlm,
                      run.seconds);
        detail += buf;
        CHECK(margin);
        CHECK(timely);
    }
    report(5, ok, detail);
}

TEST_CASE("criterion 6: learned topics recover the synthetic vocabularies") {
    const SharedRuns& s = shared_runs();
    REQUIRE(s.ok);
    TcnlmModel model = load_checkpoint(s.runs[0].ckpt.string());
    Vocabulary vocab = Vocabulary::load((s.ws / "data" / "vocab.txt").string());
    const auto tops = top_word_ids(model.ntm, 10);
    REQUIRE(tops.size() == 2);

    int majority_prefix[2] = {-1, -1};
    bool pure = true;
    std::string detail;
    for (int t = 0; t < 2; ++t) {
        int alpha = 0, bravo = 0;
        for (int id : tops[t]) {
            const std::string& w = vocab.tm_token(id);
            if (w.rfind("alpha", 0) == 0) ++alpha;
            if (w.rfind("bravo", 0) == 0) ++bravo;
        }
        majority_prefix[t] = alpha >= bravo ? 0 : 1;
        const int majority = std::max(alpha, bravo);
        pure = pure && majority >= 8;  // >= 80% of the top-10
        char buf[64];
        std::snprintf(buf, sizeof(buf), "[topic %d: %d alpha, %d bravo] ", t, alpha, bravo);
        detail += buf;
        CHECK(majority >= 8);
    }
    const bool distinct = majority_prefix[0] != majority_prefix[1];
    CHECK(distinct);
    report(6, pure && distinct, detail);
}

TEST_CASE("criterion 7: diversity regularizer lowers the beta cosine") {
    // small in-process pair of runs, identical seeds, lambda 0.1 vs 0
    SyntheticSpec spec;
    spec.paragraphs = 120;
    std::istringstream in(synthetic_corpus_text(spec));
    const auto paras = read_paragraphs(in);
    VocabConfig vcfg;
    vcfg.lm_min_count = 1;
    vcfg.tm_min_count = 1;
    vcfg.tm_max_frac = 0.0;
    vcfg.tm_min_doc_freq = 1;
    std::vector<std::vector<std::string>> docs;
    for (const auto& p : paras) docs.push_back(paragraph_tokens(p));
    Vocabulary vocab = Vocabulary::build(docs, vcfg);
    std::vector<TrainingInstance> train_set, dev_set;
    CorpusConfig ccfg;
    for (size_t i = 0; i < paras.size(); ++i) {
        auto instances = make_instances(paras[i], vocab, ccfg);
        auto& sink = (i % 10 == 9) ? dev_set : train_set;
        for (auto& inst : instances) sink.push_back(std::move(inst));
    }

    Config base = preset_config("toy");
    base.train.epochs = 25;
    Config with = base, without = base;
    with.train.lambda = 0.1;
    without.train.lambda = 0.0;

    RngStream r1(3), r2(3);
    TcnlmModel m1 = TcnlmModel::init(vocab.lm_size(), vocab.tm_size(), with.model, r1);
    TcnlmModel m2 = TcnlmModel::init(vocab.lm_size(), vocab.tm_size(), without.model, r2);
    train_tcnlm(m1, train_set, dev_set, with);
    train_tcnlm(m2, train_set, dev_set, without);
    const double cos_with = mean_offdiag_beta_cosine(m1.ntm);
    const double cos_without = mean_offdiag_beta_cosine(m2.ntm);
    const bool ok = cos_with < cos_without;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "cosine %.4f with lambda vs %.4f without", cos_with,
                  cos_without);
    report(7, ok, detail);
    CHECK(ok);
}

TEST_CASE("criterion 8: compare-moe ordering holds") {
    const SharedRuns& s = shared_runs();
    REQUIRE(s.ok);
    int moe_clause = 0;
    bool below_basic = true;
    std::string detail;
    for (const auto& run : s.runs) {
        if (run.tcnlm <= 1.05 * run.moe) ++moe_clause;
        below_basic = below_basic && run.tcnlm < run.basic && run.moe < run.basic;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "[basic %.2f moe %.2f tcnlm %.2f] ", run.basic, run.moe,
                      run.tcnlm);
        detail += buf;
        CHECK(run.moe < run.basic);
        CHECK(run.tcnlm < run.basic);
    }
    const bool ok = moe_clause >= 2 && below_basic;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "moe clause %d/3", moe_clause);
    detail += buf;
    report(8, ok, detail);
    CHECK(moe_clause >= 2);
}

TEST_CASE("criterion 9: bit-identical reruns of train, eval and generate") {
    const fs::path ws = fs::current_path() / "acceptance_det";
    fs::remove_all(ws);
    fs::create_directories(ws);
    {
        SyntheticSpec spec;
        spec.paragraphs = 30;
        spec.seed = 13;
        std::ofstream f(ws / "corpus.txt", std::ios::binary);
        f << synthetic_corpus_text(spec);
    }
    {
        std::ofstream f(ws / "tiny.cfg");
        f << "T = 2\nn_x = 8\nn_h = 10\nn_f = 8\nenc_hidden1 = 16\nenc_hidden2 = 16\n"
          << "epochs = 2\nlr = 0.002\ndropout = 0.1\nseed = 5\nbatch_size = 16\n";
    }
    REQUIRE(run_cli("preprocess " + (ws / "corpus.txt").string() + " --out " +
                        (ws / "data").string() +
                        " --lm-min-count 1 --tm-min-count 1 --tm-min-doc-freq 1",
                    ws / "pre.txt") == 0);

    bool ok = true;
    for (int round = 1; round <= 2; ++round) {
        const std::string sfx = std::to_string(round);
        REQUIRE(run_cli("train --data " + (ws / "data").string() + " --config " +
                            (ws / "tiny.cfg").string() + " --out " +
                            (ws / ("m" + sfx + ".ckpt")).string(),
                        ws / ("train" + sfx + ".txt")) == 0);
        REQUIRE(run_cli("eval --ckpt " + (ws / ("m" + sfx + ".ckpt")).string() + " --data " +
                            (ws / "data").string(),
                        ws / ("eval" + sfx + ".txt")) == 0);
        REQUIRE(run_cli("generate --ckpt " + (ws / ("m" + sfx + ".ckpt")).string() +
                            " --data " + (ws / "data").string() + " --topics 0,1 --max-len 12",
                        ws / ("gen" + sfx + ".txt")) == 0);
    }
    const bool ckpt_same = read_file(ws / "m1.ckpt") == read_file(ws / "m2.ckpt");
    const bool log_same = read_file(ws / "m1.ckpt.log") == read_file(ws / "m2.ckpt.log");
    const bool stdout_same = read_file(ws / "train1.txt") == read_file(ws / "train2.txt");
    const bool eval_same = read_file(ws / "eval1.txt") == read_file(ws / "eval2.txt");
    const bool gen_same = read_file(ws / "gen1.txt") == read_file(ws / "gen2.txt");
    ok = ckpt_same && log_same && stdout_same && eval_same && gen_same;
    CHECK(ckpt_same);
    CHECK(log_same);
    CHECK(stdout_same);
    CHECK(eval_same);
    CHECK(gen_same);
    report(9, ok,
           std::string("ckpt ") + (ckpt_same ? "ok" : "DIFF") + ", log " +
               (log_same ? "ok" : "DIFF") + ", eval " + (eval_same ? "ok" : "DIFF") +
               ", generate " + (gen_same ? "ok" : "DIFF"));
    fs::remove_all(ws);
}

TEST_CASE("criterion 10: evaluation oracles") {
    bool ok = true;

    // forced-uniform perplexity equals D_lm
    {
        ModelConfig cfg = micro_model();
        RngStream rng(1);
        TcnlmModel model = TcnlmModel::init(37, 4, cfg, rng);
        model.nlm.v_out.fill(0.0);
        std::vector<TrainingInstance> instances = {{{5, 9, kEosId}, {1, 0, 0, 2}},
                                                   {{17, kEosId}, {0, 1, 0, 0}}};
        const double ppl = perplexity(model, instances);
        ok = ok && std::fabs(ppl - 37.0) < 1e-9;
        CHECK(ppl == doctest::Approx(37.0).epsilon(1e-9));
    }

    // NPMI hand cases
    double perfect, indep;
    {
        CooccurrenceStats s;
        s.total_windows = 10;
        const int x = s.intern("x"), y = s.intern("y");
        s.add_word(x);
        s.add_word(y);
        s.add_pair(x, y);
        perfect = npmi("x", "y", s);
        ok = ok && std::fabs(perfect - 1.0) < 1e-12;
        CHECK(perfect == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        CooccurrenceStats s;
        s.total_windows = 4;
        const int x = s.intern("x"), y = s.intern("y");
        for (int i = 0; i < 2; ++i) {
            s.add_word(x);
            s.add_word(y);
        }
        s.add_pair(x, y);
        indep = npmi("x", "y", s);
        ok = ok && std::fabs(indep) < 1e-12;
        CHECK(indep == doctest::Approx(0.0).epsilon(1e-12));
    }

    // coherence against hand enumeration on 6-word stats
    double coh_err;
    {
        VocabConfig vcfg;
        vcfg.lm_min_count = 1;
        vcfg.tm_min_count = 1;
        vcfg.tm_max_frac = 0.0;
        vcfg.tm_min_doc_freq = 1;
        Vocabulary vocab =
            Vocabulary::build({{"w0", "w1", "w2", "w3", "w4", "w5"}}, vcfg);
        ModelConfig mcfg = micro_model();
        RngStream rng(2);
        NtmParams params = NtmParams::init(6, mcfg, rng);
        for (int d = 0; d < 6; ++d) {
            params.beta_logits(0, d) = -0.25 * d;
            params.beta_logits(1, d) = 0.25 * d;
        }
        CooccurrenceStats s;
        s.total_windows = 40;
        const long long wc[6] = {10, 8, 12, 6, 9, 11};
        for (int d = 0; d < 6; ++d) {
            const int id = s.intern(vocab.tm_token(d));
            for (long long i = 0; i < wc[d]; ++i) s.add_word(id);
        }
        const long long pc[6][6] = {{0, 5, 3, 2, 4, 6}, {0, 0, 2, 1, 3, 2}, {0, 0, 0, 4, 5, 7},
                                    {0, 0, 0, 0, 2, 1}, {0, 0, 0, 0, 0, 3}, {0, 0, 0, 0, 0, 0}};
        for (int a = 0; a < 6; ++a)
            for (int b = a + 1; b < 6; ++b)
                for (long long i = 0; i < pc[a][b]; ++i)
                    s.add_pair(s.intern(vocab.tm_token(a)), s.intern(vocab.tm_token(b)));

        const auto rep = topic_coherence(params, vocab, s);
        auto mean_pairwise = [&](const std::vector<int>& ids) {
            double acc = 0.0;
            int n = 0;
            for (size_t i = 0; i < ids.size(); ++i)
                for (size_t j = i + 1; j < ids.size(); ++j) {
                    acc += npmi(vocab.tm_token(ids[i]), vocab.tm_token(ids[j]), s);
                    ++n;
                }
            return acc / n;
        };
        const std::vector<int> t0 = {0, 1, 2, 3, 4, 5};
        const std::vector<int> t1 = {5, 4, 3, 2, 1, 0};
        auto per_topic = [&](const std::vector<int>& order) {
            const double n5 = mean_pairwise({order.begin(), order.begin() + 5});
            const double rest = mean_pairwise(order);
            return (n5 + 3.0 * rest) / 4.0;
        };
        const double expect = 0.5 * (per_topic(t0) + per_topic(t1));
        coh_err = std::fabs(rep.coherence - expect);
        ok = ok && coh_err < 1e-12;
        CHECK(rep.coherence == doctest::Approx(expect).epsilon(1e-12));
    }

    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "uniform ppl ok, npmi perfect err %.2g, indep err %.2g, coherence err %.2g",
                  std::fabs(perfect - 1.0), std::fabs(indep), coh_err);
    report(10, ok, detail);
}
