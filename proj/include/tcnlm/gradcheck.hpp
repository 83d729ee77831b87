#pragma once

#include <functional>
#include <vector>

#include "tcnlm/tape.hpp"

namespace tcnlm::ad {

struct DiffCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
};

// Builds a scalar loss on the given tape from the staged parameter leaves.
// Must be deterministic: any random draws are fixed by the caller and baked
// into the closure as constants.
using GraphBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central differences (f(p+h)-f(p-h))/2h per coordinate against backward().
// rel_err = |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// Throws NumericError if f evaluates non-finite.
DiffCheckReport finite_diff_check(const GraphBuilder& f, const std::vector<Array>& params,
                                  double h, double tol);

}  // namespace tcnlm::ad
