#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tcnlm/array.hpp"

namespace tcnlm::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid for that tape's lifetime.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
};

// Reverse-mode computation record. Every primitive application appends a node
// whose backward closure scatters the incoming gradient into its parents;
// node creation order is a topological order, so backward() is a single
// reverse sweep from the loss node. Nodes that cannot reach a parameter leaf
// carry no backward closure and are skipped.
class Tape {
public:
    using BackFn = std::function<void(Tape&, const Array& grad_out)>;

    Var param(Array value);     // differentiable leaf
    Var constant(Array value);  // non-differentiable leaf

    const Array& value(Var v) const { return nodes_[check(v)].value; }
    // Valid after backward(); parameters untouched by the loss get zeros.
    const Array& grad(Var v);

    // loss must be a 1x1 node on this tape. Clears previous gradients, so
    // separate calls on the same tape are independent passes.
    void backward(Var loss);

    int size() const { return static_cast<int>(nodes_.size()); }

    // Builder interface used by the primitive free functions.
    Var emplace(Array value, bool needs_grad, BackFn back, const char* opname);
    bool wants(int id) const { return nodes_[id].needs_grad; }
    bool needs_grad(Var v) const { return nodes_[check(v)].needs_grad; }
    const Array& node_value(int id) const { return nodes_[id].value; }
    void accumulate(int id, const Array& g);

private:
    struct Node {
        Array value;
        Array grad;
        BackFn back;
        bool needs_grad = false;
        bool is_param = false;
    };

    int check(Var v) const;
    std::vector<Node> nodes_;
};

// Primitives. All validate shapes and report the primitive name on mismatch.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);  // same shape, or matrix plus (rows,1) column bias
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var smul(Var s, Var a);  // s is 1x1; scales a by a recorded scalar
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
// Softmax over each row; a column vector is treated as a single distribution.
Var softmax(Var a);
Var log(Var a);
Var exp(Var a);
Var sum(Var a);  // 1x1
Var gather_rows(Var m, std::vector<int> ids);
Var dropout_mask(Var a, const Array& mask);  // multiply by a pre-sampled constant mask

// Pairwise topic angles: rows (T x D) -> (T x T) with entry (i,j) =
// arccos(|r_i . r_j| / (|r_i| |r_j|)). The diagonal is exactly 0 (the cosine
// of a row with itself is 1 by definition). The arccos derivative is
// unbounded at +-1, so backward evaluates it on the cosine clamped to
// [-1+kAngleClamp, 1-kAngleClamp]; forward is unclamped apart from an exact
// [-1,1] guard against rounding.
inline constexpr double kAngleClamp = 1e-6;
Var pairwise_angles(Var rows);

}  // namespace tcnlm::ad
