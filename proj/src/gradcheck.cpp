#include "tcnlm/gradcheck.hpp"

#include <cmath>

namespace tcnlm::ad {

namespace {

double evaluate(const GraphBuilder& f, const std::vector<Array>& params) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Array& p : params) vars.push_back(tape.param(p));
    Var loss = f(tape, vars);
    const Array& v = tape.value(loss);
    if (v.rows() != 1 || v.cols() != 1)
        throw ShapeError("finite_diff_check: f must return a scalar, got " + v.shape_str());
    if (!std::isfinite(v[0])) throw NumericError("finite_diff_check: f evaluated non-finite");
    return v[0];
}

}  // namespace

DiffCheckReport finite_diff_check(const GraphBuilder& f, const std::vector<Array>& params,
                                  double h, double tol) {
    if (h <= 0.0) throw NumericError("finite_diff_check: h must be positive");

    // Analytic pass.
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Array& p : params) vars.push_back(tape.param(p));
    Var loss = f(tape, vars);
    if (tape.value(loss).rows() != 1 || tape.value(loss).cols() != 1)
        throw ShapeError("finite_diff_check: f must return a scalar");
    if (!std::isfinite(tape.value(loss)[0]))
        throw NumericError("finite_diff_check: f evaluated non-finite");
    tape.backward(loss);
    std::vector<Array> analytic;
    analytic.reserve(params.size());
    for (Var v : vars) analytic.push_back(tape.grad(v));

    DiffCheckReport report;
    std::vector<Array> work = params;
    for (size_t k = 0; k < params.size(); ++k) {
        for (int i = 0; i < params[k].size(); ++i) {
            const double orig = work[k][i];
            work[k][i] = orig + h;
            const double fp = evaluate(f, work);
            work[k][i] = orig - h;
            const double fm = evaluate(f, work);
            work[k][i] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[k][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            report.max_rel_err = std::max(report.max_rel_err, std::fabs(a - numeric) / denom);
        }
    }
    report.pass = report.max_rel_err < tol;
    return report;
}

}  // namespace tcnlm::ad
