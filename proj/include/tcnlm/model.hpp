#pragma once

#include <string>

#include "tcnlm/nlm.hpp"
#include "tcnlm/ntm.hpp"

namespace tcnlm {

// The jointly trained pair: topic model + topic-compositional language model.
struct TcnlmModel {
    NtmParams ntm;
    TclstmParams nlm;
    int enc_hidden1 = 0, enc_hidden2 = 0, layers = 1;

    static TcnlmModel init(int D_lm, int D, const ModelConfig& cfg, RngStream& rng);
    void for_each(const std::function<void(const std::string&, Array&)>& fn);
};

// Checkpoint file "TCNLM-CKPT-1": little-endian binary.
//   bytes 0..11   magic "TCNLM-CKPT-1"
//   10 x u32      D_lm, D, n_x, n_h, n_f, T, layers, candidate_tanh, enc_h1, enc_h2
//   2 x f64       prior mu0, sigma0
//   tensors       every parameter in for_each() order, row-major f64
void save_checkpoint(const std::string& path, TcnlmModel& model);
TcnlmModel load_checkpoint(const std::string& path);

}  // namespace tcnlm
