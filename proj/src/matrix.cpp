#include "gal/matrix.hpp"

#include <cmath>
#include <string>

#include "gal/errors.hpp"

namespace gal {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
    Matrix m(rows, cols);
    for (auto& x : m.data_) x = rng.uniform(lo, hi);
    return m;
}

void Matrix::check_finite(const char* what) const {
    for (double x : data_)
        if (!std::isfinite(x))
            throw NumericError(std::string(what) + ": non-finite value encountered");
}

namespace {
void require(bool ok, const std::string& msg) {
    if (!ok) throw DimensionError(msg);
}
std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
} // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul: " + dims(a) + " * " + dims(b));
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double av = ar[k];
            if (av == 0.0) continue;
            const double* br = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += av * br[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn: " + dims(a) + "^T * " + dims(b));
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ar = a.row(k);
        const double* br = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            double av = ar[i];
            if (av == 0.0) continue;
            double* cr = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += av * br[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt: " + dims(a) + " * " + dims(b) + "^T");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* br = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ar[k] * br[k];
            cr[j] = s;
        }
    }
    return c;
}

void add_row_vector(Matrix& m, const std::vector<double>& v) {
    require(m.cols() == v.size(), "add_row_vector: cols " + std::to_string(m.cols()) +
                                      " vs vector " + std::to_string(v.size()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) r[j] += v[j];
    }
}

std::vector<double> col_sums(const Matrix& m) {
    std::vector<double> s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) s[j] += r[j];
    }
    return s;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "operator+: " + dims(a) + " vs " + dims(b));
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.raw()[i] += b.raw()[i];
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "operator-: " + dims(a) + " vs " + dims(b));
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.raw()[i] -= b.raw()[i];
    return c;
}

Matrix operator*(const Matrix& a, double s) {
    Matrix c = a;
    for (auto& x : c.raw()) x *= s;
    return c;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "operator+=: " + dims(a) + " vs " + dims(b));
    for (std::size_t i = 0; i < a.size(); ++i) a.raw()[i] += b.raw()[i];
    return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: " + dims(a) + " vs " + dims(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.raw()[i] - b.raw()[i]));
    return m;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double x : m.raw()) s += x * x;
    return std::sqrt(s);
}

} // namespace gal
