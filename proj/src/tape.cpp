#include "tcnlm/tape.hpp"

#include <cmath>
#include <utility>

namespace tcnlm::ad {

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
    if (a.tape == nullptr || a.tape != b.tape)
        throw ShapeError(std::string(op) + ": operands on different tapes");
    return *a.tape;
}

}  // namespace

int Tape::check(Var v) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw ShapeError("Tape: invalid var handle");
    return v.id;
}

Var Tape::param(Array value) {
    value.check_finite("Tape::param");
    Node n;
    n.value = std::move(value);
    n.needs_grad = true;
    n.is_param = true;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Array value) {
    value.check_finite("Tape::constant");
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::emplace(Array value, bool needs_grad, BackFn back, const char* opname) {
    if (!value.all_finite())
        throw NumericError(std::string(opname) + ": produced non-finite values");
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.back = needs_grad ? std::move(back) : BackFn{};
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Array& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.empty()) {
        n.grad = g;
        return;
    }
    if (!n.grad.same_shape(g)) throw ShapeError("Tape::accumulate: gradient shape mismatch");
    for (int i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

const Array& Tape::grad(Var v) {
    Node& n = nodes_[check(v)];
    if (n.grad.empty()) n.grad = Array(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::backward(Var loss) {
    const int root = check(loss);
    if (nodes_[root].value.rows() != 1 || nodes_[root].value.cols() != 1)
        throw ShapeError("backward: loss must be a 1x1 scalar, got " +
                         nodes_[root].value.shape_str());
    for (Node& n : nodes_) n.grad = Array{};
    nodes_[root].grad = Array(1, 1, 1.0);
    for (int i = root; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.grad.empty() || !n.back) continue;
        n.back(*this, n.grad);
    }
    // Parameters the loss never touched report zero gradients.
    for (Node& n : nodes_)
        if (n.is_param && n.grad.empty()) n.grad = Array(n.value.rows(), n.value.cols());
}

// ---- primitives ------------------------------------------------------------

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b, "matmul");
    const Array &A = t.value(a), &B = t.value(b);
    if (A.cols() != B.rows())
        throw ShapeError("matmul: " + A.shape_str() + " x " + B.shape_str());
    Array out = tcnlm::matmul(A, B);
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id, bi = b.id](Tape& tp, const Array& g) {
            if (tp.wants(ai)) tp.accumulate(ai, tcnlm::matmul(g, tcnlm::transpose(tp.node_value(bi))));
            if (tp.wants(bi)) tp.accumulate(bi, tcnlm::matmul(tcnlm::transpose(tp.node_value(ai)), g));
        };
    return t.emplace(std::move(out), ng, std::move(back), "matmul");
}

Var transpose(Var a) {
    Tape& t = *a.tape;
    Array out = tcnlm::transpose(t.value(a));
    const bool ng = t.needs_grad(a);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id](Tape& tp, const Array& g) { tp.accumulate(ai, tcnlm::transpose(g)); };
    return t.emplace(std::move(out), ng, std::move(back), "transpose");
}

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b, "add");
    const Array &A = t.value(a), &B = t.value(b);
    const bool bias = !A.same_shape(B) && B.cols() == 1 && B.rows() == A.rows() && A.cols() > 1;
    if (!A.same_shape(B) && !bias)
        throw ShapeError("add: " + A.shape_str() + " vs " + B.shape_str());
    Array out = A;
    if (bias) {
        for (int i = 0; i < A.rows(); ++i)
            for (int j = 0; j < A.cols(); ++j) out(i, j) += B(i, 0);
    } else {
        for (int i = 0; i < A.size(); ++i) out[i] += B[i];
    }
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id, bi = b.id, bias](Tape& tp, const Array& g) {
            tp.accumulate(ai, g);
            if (!tp.wants(bi)) return;
            if (bias) {
                Array gb(g.rows(), 1);
                for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < g.cols(); ++j) gb(i, 0) += g(i, j);
                tp.accumulate(bi, gb);
            } else {
                tp.accumulate(bi, g);
            }
        };
    return t.emplace(std::move(out), ng, std::move(back), "add");
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b, "sub");
    const Array &A = t.value(a), &B = t.value(b);
    if (!A.same_shape(B)) throw ShapeError("sub: " + A.shape_str() + " vs " + B.shape_str());
    Array out = tcnlm::sub(A, B);
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id, bi = b.id](Tape& tp, const Array& g) {
            tp.accumulate(ai, g);
            if (tp.wants(bi)) tp.accumulate(bi, tcnlm::scale(g, -1.0));
        };
    return t.emplace(std::move(out), ng, std::move(back), "sub");
}

Var hadamard(Var a, Var b) {
    Tape& t = same_tape(a, b, "hadamard");
    const Array &A = t.value(a), &B = t.value(b);
    if (!A.same_shape(B))
        throw ShapeError("hadamard: " + A.shape_str() + " vs " + B.shape_str());
    Array out = tcnlm::hadamard(A, B);
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id, bi = b.id](Tape& tp, const Array& g) {
            if (tp.wants(ai)) tp.accumulate(ai, tcnlm::hadamard(g, tp.node_value(bi)));
            if (tp.wants(bi)) tp.accumulate(bi, tcnlm::hadamard(g, tp.node_value(ai)));
        };
    return t.emplace(std::move(out), ng, std::move(back), "hadamard");
}

Var scale(Var a, double s) {
    Tape& t = *a.tape;
    Array out = tcnlm::scale(t.value(a), s);
    const bool ng = t.needs_grad(a);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id, s](Tape& tp, const Array& g) { tp.accumulate(ai, tcnlm::scale(g, s)); };
    return t.emplace(std::move(out), ng, std::move(back), "scale");
}

Var smul(Var s, Var a) {
    Tape& t = same_tape(s, a, "smul");
    const Array& S = t.value(s);
    if (S.rows() != 1 || S.cols() != 1)
        throw ShapeError("smul: scalar operand must be 1x1, got " + S.shape_str());
    Array out = tcnlm::scale(t.value(a), S[0]);
    const bool ng = t.needs_grad(a) || t.needs_grad(s);
    Tape::BackFn back;
    if (ng)
        back = [si = s.id, ai = a.id](Tape& tp, const Array& g) {
            const double sv = tp.node_value(si)[0];
            if (tp.wants(ai)) tp.accumulate(ai, tcnlm::scale(g, sv));
            if (tp.wants(si)) {
                Array gs(1, 1);
                gs[0] = tcnlm::dot(g, tp.node_value(ai));
                tp.accumulate(si, gs);
            }
        };
    return t.emplace(std::move(out), ng, std::move(back), "smul");
}

namespace {

template <typename Fwd, typename BwdFromOut>
Var elementwise(Var a, const char* name, Fwd fwd, BwdFromOut dydout) {
    Tape& t = *a.tape;
    Array out = t.value(a);
    for (int i = 0; i < out.size(); ++i) out[i] = fwd(out[i]);
    const bool ng = t.needs_grad(a);
    Tape::BackFn back;
    if (ng) {
        const int oid = t.size();  // id of the node about to be created
        back = [ai = a.id, oid, dydout](Tape& tp, const Array& g) {
            const Array& in = tp.node_value(ai);
            const Array& out = tp.node_value(oid);
            Array gi = g;
            for (int i = 0; i < gi.size(); ++i) gi[i] *= dydout(in[i], out[i]);
            tp.accumulate(ai, gi);
        };
    }
    return t.emplace(std::move(out), ng, std::move(back), name);
}

}  // namespace

Var sigmoid(Var a) {
    return elementwise(
        a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
    return elementwise(
        a, "tanh", [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
    return elementwise(
        a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var log(Var a) {
    return elementwise(
        a, "log", [](double x) { return std::log(x); },
        [](double x, double) { return 1.0 / x; });
}

Var exp(Var a) {
    return elementwise(
        a, "exp", [](double x) { return std::exp(x); },
        [](double, double y) { return y; });
}

Var softmax(Var a) {
    Tape& t = *a.tape;
    const Array& A = t.value(a);
    // A column vector is one distribution; otherwise each row is one.
    const bool column = A.cols() == 1 && A.rows() > 1;
    Array out = column ? tcnlm::transpose(A) : A;
    for (int i = 0; i < out.rows(); ++i) {
        double mx = out(i, 0);
        for (int j = 1; j < out.cols(); ++j) mx = std::max(mx, out(i, j));
        double z = 0.0;
        for (int j = 0; j < out.cols(); ++j) {
            out(i, j) = std::exp(out(i, j) - mx);
            z += out(i, j);
        }
        for (int j = 0; j < out.cols(); ++j) out(i, j) /= z;
    }
    if (column) out = tcnlm::transpose(out);
    const bool ng = t.needs_grad(a);
    Tape::BackFn back;
    if (ng) {
        const int oid = t.size();
        back = [ai = a.id, oid, column](Tape& tp, const Array& g) {
            const Array& p = tp.node_value(oid);
            Array gi(p.rows(), p.cols());
            if (column) {
                double gp = 0.0;
                for (int i = 0; i < p.rows(); ++i) gp += g(i, 0) * p(i, 0);
                for (int i = 0; i < p.rows(); ++i) gi(i, 0) = p(i, 0) * (g(i, 0) - gp);
            } else {
                for (int i = 0; i < p.rows(); ++i) {
                    double gp = 0.0;
                    for (int j = 0; j < p.cols(); ++j) gp += g(i, j) * p(i, j);
                    for (int j = 0; j < p.cols(); ++j) gi(i, j) = p(i, j) * (g(i, j) - gp);
                }
            }
            tp.accumulate(ai, gi);
        };
    }
    return t.emplace(std::move(out), ng, std::move(back), "softmax");
}

Var sum(Var a) {
    Tape& t = *a.tape;
    Array out(1, 1);
    out[0] = tcnlm::sum(t.value(a));
    const bool ng = t.needs_grad(a);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id](Tape& tp, const Array& g) {
            const Array& in = tp.node_value(ai);
            Array gi(in.rows(), in.cols(), 0.0);
            for (int i = 0; i < gi.size(); ++i) gi[i] = g[0];
            tp.accumulate(ai, gi);
        };
    return t.emplace(std::move(out), ng, std::move(back), "sum");
}

Var gather_rows(Var m, std::vector<int> ids) {
    Tape& t = *m.tape;
    const Array& M = t.value(m);
    Array out(static_cast<int>(ids.size()), M.cols());
    for (size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] < 0 || ids[r] >= M.rows())
            throw ShapeError("gather_rows: row " + std::to_string(ids[r]) + " out of " +
                             std::to_string(M.rows()));
        for (int j = 0; j < M.cols(); ++j) out(static_cast<int>(r), j) = M(ids[r], j);
    }
    const bool ng = t.needs_grad(m);
    Tape::BackFn back;
    if (ng)
        back = [mi = m.id, ids = std::move(ids)](Tape& tp, const Array& g) {
            const Array& M = tp.node_value(mi);
            Array gm(M.rows(), M.cols());
            for (size_t r = 0; r < ids.size(); ++r)
                for (int j = 0; j < M.cols(); ++j) gm(ids[r], j) += g(static_cast<int>(r), j);
            tp.accumulate(mi, gm);
        };
    return t.emplace(std::move(out), ng, std::move(back), "gather_rows");
}

Var dropout_mask(Var a, const Array& mask) {
    Tape& t = *a.tape;
    const Array& A = t.value(a);
    if (!A.same_shape(mask))
        throw ShapeError("dropout_mask: " + A.shape_str() + " vs " + mask.shape_str());
    Array out = tcnlm::hadamard(A, mask);
    const bool ng = t.needs_grad(a);
    Tape::BackFn back;
    if (ng)
        back = [ai = a.id, mask](Tape& tp, const Array& g) {
            tp.accumulate(ai, tcnlm::hadamard(g, mask));
        };
    return t.emplace(std::move(out), ng, std::move(back), "dropout_mask");
}

Var pairwise_angles(Var rows) {
    Tape& t = *rows.tape;
    const Array& B = t.value(rows);
    const int T = B.rows(), D = B.cols();
    if (T < 1 || D < 1) throw ShapeError("pairwise_angles: empty input " + B.shape_str());
    std::vector<double> norm(T);
    for (int i = 0; i < T; ++i) {
        double s = 0.0;
        for (int d = 0; d < D; ++d) s += B(i, d) * B(i, d);
        norm[i] = std::sqrt(s);
        if (norm[i] == 0.0) throw NumericError("pairwise_angles: zero row norm");
    }
    Array out(T, T);
    for (int i = 0; i < T; ++i) {
        for (int j = i + 1; j < T; ++j) {
            double d = 0.0;
            for (int k = 0; k < D; ++k) d += B(i, k) * B(j, k);
            double c = std::fabs(d) / (norm[i] * norm[j]);
            c = std::min(1.0, std::max(-1.0, c));  // guard rounding only
            const double a = std::acos(c);
            out(i, j) = a;
            out(j, i) = a;
        }
    }
    const bool ng = t.needs_grad(rows);
    Tape::BackFn back;
    if (ng)
        back = [ri = rows.id, norm](Tape& tp, const Array& g) {
            const Array& B = tp.node_value(ri);
            const int T = B.rows(), D = B.cols();
            Array gb(T, D);
            const double hi = 1.0 - kAngleClamp;
            for (int i = 0; i < T; ++i) {
                for (int j = i + 1; j < T; ++j) {
                    const double go = g(i, j) + g(j, i);
                    if (go == 0.0) continue;
                    double d = 0.0;
                    for (int k = 0; k < D; ++k) d += B(i, k) * B(j, k);
                    const double nn = norm[i] * norm[j];
                    const double raw = d / nn;
                    const double sgn = raw > 0.0 ? 1.0 : (raw < 0.0 ? -1.0 : 0.0);
                    double c = std::fabs(raw);
                    if (c > hi) c = hi;  // bounds the otherwise unbounded slope
                    const double da = -1.0 / std::sqrt(1.0 - c * c);
                    const double f = go * da * sgn;
                    for (int k = 0; k < D; ++k) {
                        gb(i, k) += f * (B(j, k) / nn - raw * B(i, k) / (norm[i] * norm[i]));
                        gb(j, k) += f * (B(i, k) / nn - raw * B(j, k) / (norm[j] * norm[j]));
                    }
                }
            }
            tp.accumulate(ri, gb);
        };
    return t.emplace(std::move(out), ng, std::move(back), "pairwise_angles");
}

}  // namespace tcnlm::ad
