#pragma once
#include <cstddef>
#include <vector>

#include "gal/rng.hpp"

namespace gal {

// Dense row-major matrix of doubles. Small and explicit: every consumer in
// this project operates on matrices of at most a few thousand entries per
// dimension, so plain loops are fast enough and easy to verify.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    void check_finite(const char* what) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

void add_row_vector(Matrix& m, const std::vector<double>& v);
std::vector<double> col_sums(const Matrix& m);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, double s);
Matrix& operator+=(Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);

} // namespace gal
