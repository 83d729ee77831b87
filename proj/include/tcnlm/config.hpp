#pragma once

#include <cstdint>
#include <string>

namespace tcnlm {

struct ModelConfig {
    int T = 2;            // topics
    int n_x = 16;         // word embedding width
    int n_h = 24;         // hidden units per layer
    int n_f = 16;         // factors
    int layers = 1;
    int enc_hidden1 = 64;
    int enc_hidden2 = 64;
    bool candidate_tanh = false;  // candidate gate nonlinearity; sigmoid by default
    double mu0 = 0.0;
    double sigma0 = 1.0;
    bool diversity_off_diagonal = false;
};

struct TrainConfig {
    double lambda = 0.1;  // diversity regularizer weight
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 16;
    int epochs = 20;
    double dropout = 0.4;
    double clip_norm = 5.0;
    uint64_t seed = 1;
    int seq_cap = 30;
    int eval_every = 1;       // dev perplexity cadence (epochs)
    int kl_warmup_epochs = 0; // 0 = no annealing
};

struct EvalConfig {
    int npmi_window = 10;
    double npmi_eps = 1e-12;
};

struct Config {
    ModelConfig model;
    TrainConfig train;
    EvalConfig eval;
};

// Flat "key = value" file, '#' comments, UTF-8. Unknown keys are errors.
Config parse_config_file(const std::string& path);
void apply_config_line(Config& cfg, const std::string& key, const std::string& value);

// Named presets: "toy" (acceptance-scale), "small" (1x600), "large" (2x900).
Config preset_config(const std::string& name);

// File path if it exists, otherwise a preset name.
Config resolve_config(const std::string& path_or_preset);

}  // namespace tcnlm
