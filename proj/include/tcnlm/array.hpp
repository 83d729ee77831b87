#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "tcnlm/error.hpp"

namespace tcnlm {

// Dense row-major matrix of 64-bit floats. Vectors are (n, 1) columns.
// Entries must be finite; factory functions reject NaN/Inf.
class Array {
public:
    Array() = default;
    Array(int rows, int cols, double fill = 0.0);

    static Array col(std::initializer_list<double> values);
    static Array row(std::initializer_list<double> values);
    static Array from_data(int rows, int cols, std::vector<double> values);
    static Array from_counts(const std::vector<int>& counts);  // column vector

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return rows_ * cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double& operator[](int i) { return data_[i]; }
    double operator[](int i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Array& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const;

    void fill(double v);
    bool all_finite() const;
    void check_finite(const std::string& what) const;  // throws NumericError

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Plain (non-recorded) array math. Used by the optimizer, explicit weight
// composition, and test oracles; the tape ops in tape.hpp wrap these.
Array matmul(const Array& a, const Array& b);
Array transpose(const Array& a);
Array add(const Array& a, const Array& b);
Array sub(const Array& a, const Array& b);
Array hadamard(const Array& a, const Array& b);
Array scale(const Array& a, double s);
double dot(const Array& a, const Array& b);
double sum(const Array& a);
double l2_norm(const Array& a);

}  // namespace tcnlm
