#include "tcnlm/array.hpp"

#include <cmath>
#include <utility>

namespace tcnlm {

Array::Array(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw ShapeError("Array: negative dimensions");
    if (!std::isfinite(fill)) throw NumericError("Array: non-finite fill value");
}

Array Array::col(std::initializer_list<double> values) {
    return from_data(static_cast<int>(values.size()), 1, std::vector<double>(values));
}

Array Array::row(std::initializer_list<double> values) {
    return from_data(1, static_cast<int>(values.size()), std::vector<double>(values));
}

Array Array::from_data(int rows, int cols, std::vector<double> values) {
    if (static_cast<size_t>(rows) * cols != values.size())
        throw ShapeError("Array::from_data: " + std::to_string(values.size()) + " values for (" +
                         std::to_string(rows) + "," + std::to_string(cols) + ")");
    Array a;
    a.rows_ = rows;
    a.cols_ = cols;
    a.data_ = std::move(values);
    a.check_finite("Array::from_data");
    return a;
}

Array Array::from_counts(const std::vector<int>& counts) {
    Array a(static_cast<int>(counts.size()), 1);
    for (size_t i = 0; i < counts.size(); ++i) a.data_[i] = static_cast<double>(counts[i]);
    return a;
}

std::string Array::shape_str() const {
    return "(" + std::to_string(rows_) + "," + std::to_string(cols_) + ")";
}

void Array::fill(double v) {
    for (double& x : data_) x = v;
}

bool Array::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

void Array::check_finite(const std::string& what) const {
    if (!all_finite()) throw NumericError(what + ": non-finite entries");
}

Array matmul(const Array& a, const Array& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: " + a.shape_str() + " x " + b.shape_str());
    Array out(a.rows(), b.cols());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        for (int l = 0; l < k; ++l) {
            const double av = a(i, l);
            if (av == 0.0) continue;
            for (int j = 0; j < n; ++j) out(i, j) += av * b(l, j);
        }
    }
    return out;
}

Array transpose(const Array& a) {
    Array out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Array add(const Array& a, const Array& b) {
    if (!a.same_shape(b)) throw ShapeError("add: " + a.shape_str() + " vs " + b.shape_str());
    Array out = a;
    for (int i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Array sub(const Array& a, const Array& b) {
    if (!a.same_shape(b)) throw ShapeError("sub: " + a.shape_str() + " vs " + b.shape_str());
    Array out = a;
    for (int i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Array hadamard(const Array& a, const Array& b) {
    if (!a.same_shape(b)) throw ShapeError("hadamard: " + a.shape_str() + " vs " + b.shape_str());
    Array out = a;
    for (int i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

Array scale(const Array& a, double s) {
    Array out = a;
    for (int i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
}

double dot(const Array& a, const Array& b) {
    if (!a.same_shape(b)) throw ShapeError("dot: " + a.shape_str() + " vs " + b.shape_str());
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sum(const Array& a) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i];
    return s;
}

double l2_norm(const Array& a) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

}  // namespace tcnlm
