#include "tcnlm/config.hpp"

#include <filesystem>
#include <fstream>

#include "tcnlm/error.hpp"

namespace tcnlm {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw DataError("config: bad boolean for " + key + ": " + v);
}

}  // namespace

void apply_config_line(Config& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "T") cfg.model.T = std::stoi(value);
        else if (key == "n_x") cfg.model.n_x = std::stoi(value);
        else if (key == "n_h") cfg.model.n_h = std::stoi(value);
        else if (key == "n_f") cfg.model.n_f = std::stoi(value);
        else if (key == "layers") cfg.model.layers = std::stoi(value);
        else if (key == "enc_hidden1") cfg.model.enc_hidden1 = std::stoi(value);
        else if (key == "enc_hidden2") cfg.model.enc_hidden2 = std::stoi(value);
        else if (key == "candidate_tanh") cfg.model.candidate_tanh = parse_bool(value, key);
        else if (key == "mu0") cfg.model.mu0 = std::stod(value);
        else if (key == "sigma0") cfg.model.sigma0 = std::stod(value);
        else if (key == "diversity_off_diagonal")
            cfg.model.diversity_off_diagonal = parse_bool(value, key);
        else if (key == "lambda") cfg.train.lambda = std::stod(value);
        else if (key == "lr") cfg.train.lr = std::stod(value);
        else if (key == "beta1") cfg.train.beta1 = std::stod(value);
        else if (key == "beta2") cfg.train.beta2 = std::stod(value);
        else if (key == "adam_eps") cfg.train.adam_eps = std::stod(value);
        else if (key == "batch_size") cfg.train.batch_size = std::stoi(value);
        else if (key == "epochs") cfg.train.epochs = std::stoi(value);
        else if (key == "dropout") cfg.train.dropout = std::stod(value);
        else if (key == "clip_norm") cfg.train.clip_norm = std::stod(value);
        else if (key == "seed") cfg.train.seed = std::stoull(value);
        else if (key == "seq_cap") cfg.train.seq_cap = std::stoi(value);
        else if (key == "eval_every") cfg.train.eval_every = std::stoi(value);
        else if (key == "kl_warmup_epochs") cfg.train.kl_warmup_epochs = std::stoi(value);
        else if (key == "npmi_window") cfg.eval.npmi_window = std::stoi(value);
        else if (key == "npmi_eps") cfg.eval.npmi_eps = std::stod(value);
        else throw DataError("config: unknown key: " + key);
    } catch (const std::invalid_argument&) {
        throw DataError("config: bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw DataError("config: value out of range for " + key + ": " + value);
    }
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected key = value");
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

Config preset_config(const std::string& name) {
    Config cfg;
    if (name == "toy") {
        cfg.model = ModelConfig{};  // T=2, n_x=16, n_h=24, n_f=16, enc 64/64
        cfg.train.batch_size = 4;
        cfg.train.epochs = 80;
        cfg.train.lr = 2e-3;
        cfg.train.dropout = 0.0;  // desk-scale corpora are too small to need it
        cfg.train.kl_warmup_epochs = 15;  // frees the encoder to separate topics early
        return cfg;
    }
    if (name == "small") {
        cfg.model.T = 100;
        cfg.model.n_x = 300;
        cfg.model.n_h = 600;
        cfg.model.n_f = 128;
        cfg.model.layers = 1;
        cfg.model.enc_hidden1 = cfg.model.enc_hidden2 = 256;
        cfg.train.batch_size = 32;
        cfg.train.epochs = 10;
        cfg.train.dropout = 0.4;
        return cfg;
    }
    if (name == "large") {
        cfg.model.T = 100;
        cfg.model.n_x = 300;
        cfg.model.n_h = 900;
        cfg.model.n_f = 256;
        cfg.model.layers = 2;
        cfg.model.enc_hidden1 = cfg.model.enc_hidden2 = 256;
        cfg.train.batch_size = 32;
        cfg.train.epochs = 10;
        cfg.train.dropout = 0.4;
        return cfg;
    }
    throw DataError("unknown config preset: " + name);
}

Config resolve_config(const std::string& path_or_preset) {
    if (std::filesystem::exists(path_or_preset)) return parse_config_file(path_or_preset);
    return preset_config(path_or_preset);
}

}  // namespace tcnlm
