#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tcnlm/tape.hpp"

namespace tcnlm {

// Parameter tensors staged on a tape, addressable both by tensor identity
// (to wire up typed graph structs) and by name (to pull gradients for the
// optimizer). Names come from the model's for_each(), the single source of
// parameter order.
struct StageMap {
    std::unordered_map<const Array*, ad::Var> by_addr;
    std::vector<std::pair<std::string, ad::Var>> named;

    ad::Var at(const Array& a) const { return by_addr.at(&a); }
};

template <typename M>
StageMap stage_all(ad::Tape& tape, M& m, bool trainable = true) {
    StageMap sm;
    m.for_each([&](const std::string& name, Array& a) {
        ad::Var v = trainable ? tape.param(a) : tape.constant(a);
        sm.by_addr[&a] = v;
        sm.named.emplace_back(name, v);
    });
    return sm;
}

}  // namespace tcnlm
