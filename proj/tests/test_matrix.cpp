#include <cmath>
#include <limits>

#include "doctest.h"
#include "gal/errors.hpp"
#include "gal/matrix.hpp"
#include "gal/rng.hpp"
#include "helpers.hpp"

using gal::Matrix;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, gal::Rng& rng) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.raw()[i] = rng.uniform(-2.0, 2.0);
    return m;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

} // namespace

TEST_CASE("matrix: construction and element access") {
    Matrix m(2, 3, 1.5);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.size() == 6);
    CHECK(!m.empty());
    CHECK(m(1, 2) == 1.5);
    m(0, 1) = -4.0;
    CHECK(m(0, 1) == -4.0);
    CHECK(m.row(0)[1] == -4.0);

    Matrix e;
    CHECK(e.empty());
    CHECK(e.rows() == 0);
}

TEST_CASE("matrix: matmul matches a naive triple loop") {
    gal::Rng rng(21);
    for (auto [r, k, c] : {std::tuple{1, 1, 1}, std::tuple{3, 5, 2}, std::tuple{4, 4, 4},
                           std::tuple{7, 2, 9}, std::tuple{10, 16, 5}}) {
        Matrix a = random_matrix(r, k, rng);
        Matrix b = random_matrix(k, c, rng);
        CHECK(gal::max_abs_diff(gal::matmul(a, b), testutil::naive_matmul(a, b)) < 1e-12);
    }
}

TEST_CASE("matrix: transposed products match explicit transposition") {
    gal::Rng rng(22);
    Matrix a = random_matrix(6, 4, rng);
    Matrix b = random_matrix(6, 3, rng);
    CHECK(gal::max_abs_diff(gal::matmul_tn(a, b), testutil::naive_matmul(transpose(a), b)) < 1e-12);

    Matrix c = random_matrix(5, 4, rng);
    Matrix d = random_matrix(7, 4, rng);
    CHECK(gal::max_abs_diff(gal::matmul_nt(c, d), testutil::naive_matmul(c, transpose(d))) < 1e-12);
}

TEST_CASE("matrix: shape mismatches are rejected") {
    Matrix a(2, 3), b(2, 3);
    CHECK_THROWS_AS((void)gal::matmul(a, b), gal::DimensionError);
    CHECK_THROWS_AS((void)gal::matmul_tn(a, Matrix(3, 2)), gal::DimensionError);
    CHECK_THROWS_AS((void)gal::matmul_nt(a, Matrix(2, 4)), gal::DimensionError);
    CHECK_THROWS_AS((void)(a + Matrix(3, 2)), gal::DimensionError);
    CHECK_THROWS_AS((void)(a - Matrix(2, 2)), gal::DimensionError);
    Matrix acc(2, 3);
    Matrix wrong(1, 3);
    CHECK_THROWS_AS((void)(acc += wrong), gal::DimensionError);
    Matrix m(2, 2);
    std::vector<double> v = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(gal::add_row_vector(m, v), gal::DimensionError);
}

TEST_CASE("matrix: elementwise operators") {
    Matrix a(2, 2);
    a(0, 0) = 1;
    a(0, 1) = 2;
    a(1, 0) = 3;
    a(1, 1) = 4;
    Matrix b(2, 2, 1.0);

    Matrix s = a + b;
    CHECK(s(1, 1) == 5.0);
    Matrix d = a - b;
    CHECK(d(0, 0) == 0.0);
    Matrix sc = a * 0.5;
    CHECK(sc(1, 0) == 1.5);
    Matrix acc = a;
    acc += b;
    CHECK(acc(0, 1) == 3.0);
}

TEST_CASE("matrix: add_row_vector and col_sums") {
    Matrix m(2, 3);
    for (std::size_t i = 0; i < 6; ++i) m.raw()[i] = static_cast<double>(i);  // rows: 0 1 2 / 3 4 5
    gal::add_row_vector(m, {10.0, 20.0, 30.0});
    CHECK(m(0, 0) == 10.0);
    CHECK(m(1, 2) == 35.0);
    auto sums = gal::col_sums(m);
    REQUIRE(sums.size() == 3);
    CHECK(sums[0] == doctest::Approx(23.0));
    CHECK(sums[2] == doctest::Approx(67.0));
}

TEST_CASE("matrix: norms and diffs") {
    Matrix a(1, 2);
    a(0, 0) = 3;
    a(0, 1) = 4;
    CHECK(gal::frobenius_norm(a) == doctest::Approx(5.0));

    Matrix b = a;
    b(0, 1) = 4.5;
    CHECK(gal::max_abs_diff(a, b) == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)gal::max_abs_diff(a, Matrix(2, 1)), gal::DimensionError);
}

TEST_CASE("matrix: uniform init respects bounds and is deterministic") {
    gal::Rng r1(5), r2(5);
    Matrix a = Matrix::uniform(10, 10, -0.25, 0.25, r1);
    Matrix b = Matrix::uniform(10, 10, -0.25, 0.25, r2);
    CHECK(gal::max_abs_diff(a, b) == 0.0);
    for (double v : a.raw()) {
        CHECK(v >= -0.25);
        CHECK(v < 0.25);
    }
}

TEST_CASE("matrix: check_finite flags NaN and infinity") {
    Matrix m(2, 2, 1.0);
    CHECK_NOTHROW(m.check_finite("clean"));
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(m.check_finite("scores"), gal::NumericError);
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(m.check_finite("scores"), gal::NumericError);
}
