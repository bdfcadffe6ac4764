#include <cmath>
#include <vector>

#include "doctest.h"
#include "gal/errors.hpp"
#include "gal/grouping.hpp"
#include "gal/rng.hpp"
#include "gal/shift.hpp"
#include "helpers.hpp"

using gal::Matrix;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

} // namespace

TEST_CASE("binarize: strict mean threshold") {
    // Binary column passes through; continuous column thresholds at its mean;
    // constant columns go to zero because the inequality is strict.
    Matrix v(3, 3);
    double col0[] = {0, 1, 1};
    double col1[] = {10, 20, 30};
    double col2[] = {5, 5, 5};
    for (int r = 0; r < 3; ++r) {
        v(r, 0) = col0[r];
        v(r, 1) = col1[r];
        v(r, 2) = col2[r];
    }
    auto bits = gal::binarize_attributes(v);
    CHECK(bits[0 * 3 + 0] == 0);
    CHECK(bits[1 * 3 + 0] == 1);
    CHECK(bits[2 * 3 + 0] == 1);
    CHECK(bits[0 * 3 + 1] == 0);
    CHECK(bits[1 * 3 + 1] == 0);  // 20 is not strictly above the mean 20
    CHECK(bits[2 * 3 + 1] == 1);
    for (int r = 0; r < 3; ++r) CHECK(bits[r * 3 + 2] == 0);
}

TEST_CASE("binarize: idempotent on random matrices") {
    gal::Rng rng(61);
    for (int t = 0; t < 20; ++t) {
        Matrix v(5 + rng.index(5), 4 + rng.index(4));
        for (std::size_t i = 0; i < v.size(); ++i) v.raw()[i] = rng.uniform(-3.0, 3.0);
        auto once = gal::binarize_attributes(v);
        Matrix as_matrix(v.rows(), v.cols());
        for (std::size_t i = 0; i < once.size(); ++i) as_matrix.raw()[i] = once[i];
        CHECK(gal::binarize_attributes(as_matrix) == once);
    }
}

TEST_CASE("pearson_binary: worked examples") {
    using V = std::vector<std::uint8_t>;
    CHECK(gal::pearson_binary(V{1, 0, 1, 0}, V{1, 0, 1, 0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gal::pearson_binary(V{1, 1, 0, 0}, V{0, 0, 1, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(gal::pearson_binary(V{1, 1, 0, 0}, V{1, 0, 1, 0}) == doctest::Approx(0.0).epsilon(1e-12));
    // Constant side -> 0 by convention.
    CHECK(gal::pearson_binary(V{1, 1, 1}, V{1, 0, 1}) == 0.0);
    CHECK_THROWS_AS((void)gal::pearson_binary(V{1, 0}, V{1}), gal::DimensionError);
    CHECK_THROWS_AS((void)gal::pearson_binary(V{1}, V{0}), gal::InputError);
}

TEST_CASE("pearson_binary: matches a real-valued oracle on random vectors") {
    gal::Rng rng(62);
    for (int t = 0; t < 100; ++t) {
        std::size_t n = 2 + rng.index(40);
        std::vector<std::uint8_t> a(n), b(n);
        std::vector<double> ad(n), bd(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform() < 0.5 ? 0 : 1;
            b[i] = rng.uniform() < 0.5 ? 0 : 1;
            ad[i] = a[i];
            bd[i] = b[i];
        }
        CHECK(gal::pearson_binary(a, b) ==
              doctest::Approx(testutil::pearson_oracle(ad, bd)).epsilon(1e-12));
    }
}

TEST_CASE("corr_seen: constant attributes give zero correlation") {
    // One train class: every attribute is constant across its instances.
    auto attrs = gal::make_attribute_matrix(from_rows({{1, 0, 1}, {0, 1, 1}}));
    std::vector<int> labels = {0, 0, 0, 0};
    Matrix c = gal::corr_seen(attrs, labels, {0});
    for (double v : c.raw()) CHECK(v == 0.0);

    // Two classes with identical rows: still constant.
    auto same = gal::make_attribute_matrix(from_rows({{1, 0}, {1, 0}}));
    Matrix c2 = gal::corr_seen(same, {0, 1, 0, 1}, {0, 1});
    for (double v : c2.raw()) CHECK(v == 0.0);
}

TEST_CASE("corr_seen: matches the brute-force instance-level oracle") {
    gal::Rng rng(63);
    for (int t = 0; t < 20; ++t) {
        std::size_t C = 5, D = 4;
        auto attrs = gal::make_attribute_matrix(testutil::random_attribute_values(C, D, rng));
        std::vector<int> labels;
        std::vector<int> train_classes = {0, 1, 2, 3, 4};
        for (int i = 0; i < 60; ++i) labels.push_back(static_cast<int>(rng.index(C)));

        Matrix got = gal::corr_seen(attrs, labels, train_classes);
        Matrix want = testutil::corr_matrix_oracle(
            testutil::seen_instance_rows(attrs, labels, train_classes));
        CHECK(gal::max_abs_diff(got, want) < 1e-12);
    }
}

TEST_CASE("corr_seen: instances outside the train classes are ignored") {
    auto attrs = gal::make_attribute_matrix(from_rows({{1, 0}, {0, 1}, {1, 1}}));
    std::vector<int> labels = {0, 1, 0, 1, 2, 2, 2};  // class 2 is not in train
    Matrix with = gal::corr_seen(attrs, labels, {0, 1});
    std::vector<int> trimmed = {0, 1, 0, 1};
    Matrix without = gal::corr_seen(attrs, trimmed, {0, 1});
    CHECK(gal::max_abs_diff(with, without) == 0.0);
}

TEST_CASE("corr_seen: input validation") {
    auto attrs = gal::make_attribute_matrix(from_rows({{1, 0}, {0, 1}}));
    CHECK_THROWS_AS((void)gal::corr_seen(attrs, {0, 1}, {}), gal::InputError);
    CHECK_THROWS_AS((void)gal::corr_seen(attrs, {0, 1}, {0, 7}), gal::InputError);
    CHECK_THROWS_AS((void)gal::corr_seen(attrs, {0}, {0}), gal::InputError);  // one instance
}

TEST_CASE("corr_unseen: worked examples") {
    auto attrs = gal::make_attribute_matrix(from_rows({{1, 0}, {0, 1}}));
    Matrix c = gal::corr_unseen(attrs, {0, 1});
    CHECK(c(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(c(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    auto same = gal::make_attribute_matrix(from_rows({{1, 0}, {1, 0}, {1, 0}}));
    Matrix c2 = gal::corr_unseen(same, {0, 1, 2});
    for (double v : c2.raw()) CHECK(v == 0.0);

    CHECK_THROWS_AS((void)gal::corr_unseen(attrs, {0}), gal::InputError);
    CHECK_THROWS_AS((void)gal::corr_unseen(attrs, {0, 9}), gal::InputError);
}

TEST_CASE("corr_unseen: matches the brute-force oracle on a random 6x5 matrix") {
    gal::Rng rng(64);
    for (int t = 0; t < 20; ++t) {
        auto attrs = gal::make_attribute_matrix(testutil::random_attribute_values(6, 5, rng));
        std::vector<int> class_set = {0, 1, 2, 3, 4, 5};
        Matrix got = gal::corr_unseen(attrs, class_set);
        Matrix want = testutil::corr_matrix_oracle(testutil::class_rows(attrs, class_set));
        CHECK(gal::max_abs_diff(got, want) < 1e-12);
    }
}

TEST_CASE("delta_corr: worked examples") {
    CHECK(gal::delta_corr(0.6, 0.0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(gal::delta_corr(0.5, 0.8) == 0.0);   // correlation grew, same sign
    CHECK(gal::delta_corr(-0.4, 0.2) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(gal::delta_corr(0.0, 0.9) == 0.0);   // sgn(0) = 0
    CHECK(gal::delta_corr(0.0, -0.9) == 0.0);
    CHECK_THROWS_AS((void)gal::delta_corr(1.5, 0.0), gal::InputError);
    CHECK_THROWS_AS((void)gal::delta_corr(0.0, -1.1), gal::InputError);
}

TEST_CASE("delta_corr: clamp branch and bounds") {
    gal::Rng rng(65);
    for (int t = 0; t < 500; ++t) {
        double rs = rng.uniform(-1.0, 1.0);
        double ru = rng.uniform(-1.0, 1.0);
        double d = gal::delta_corr(rs, ru);
        CHECK(d >= 0.0);
        CHECK(d <= 2.0);
        if (rs == ru) CHECK(d == 0.0);
        // Moving further from zero in the seen sign's direction is not a shift.
        if (rs > 0 && ru >= rs) CHECK(d == 0.0);
        if (rs < 0 && ru <= rs) CHECK(d == 0.0);
    }
}

TEST_CASE("delta_corr_matrix: worked examples and elementwise oracle") {
    Matrix eye = from_rows({{1, 0.3}, {0.3, 1}});
    CHECK(gal::max_abs_diff(gal::delta_corr_matrix(eye, eye), Matrix(2, 2)) == 0.0);

    Matrix seen = from_rows({{1, 1}, {1, 1}});
    Matrix unseen = from_rows({{1, 0}, {0, 1}});
    Matrix d = gal::delta_corr_matrix(seen, unseen);
    CHECK(d(0, 1) == doctest::Approx(1.0));
    CHECK(d(1, 0) == doctest::Approx(1.0));
    CHECK(d(0, 0) == 0.0);
    CHECK(d(1, 1) == 0.0);

    gal::Rng rng(66);
    auto a1 = gal::make_attribute_matrix(testutil::random_attribute_values(8, 6, rng));
    auto a2 = gal::make_attribute_matrix(testutil::random_attribute_values(8, 6, rng));
    Matrix s = gal::corr_unseen(a1, {0, 1, 2, 3, 4, 5, 6, 7});
    Matrix u = gal::corr_unseen(a2, {0, 1, 2, 3, 4, 5, 6, 7});
    Matrix dm = gal::delta_corr_matrix(s, u);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(dm(i, j) == doctest::Approx(gal::delta_corr(s(i, j), u(i, j))).epsilon(1e-12));
            CHECK(dm(i, j) == doctest::Approx(dm(j, i)).epsilon(1e-12));
        }
    CHECK_THROWS_AS((void)gal::delta_corr_matrix(s, Matrix(3, 3)), gal::DimensionError);
}

TEST_CASE("shift matrices: permuting attributes permutes rows and columns") {
    gal::Rng rng(67);
    auto attrs = gal::make_attribute_matrix(testutil::random_attribute_values(7, 5, rng));
    std::vector<int> class_set = {0, 1, 2, 3, 4, 5, 6};
    Matrix base = gal::corr_unseen(attrs, class_set);

    std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    Matrix permuted_values(7, 5);
    for (std::size_t c = 0; c < 7; ++c)
        for (std::size_t a = 0; a < 5; ++a) permuted_values(c, a) = attrs.values(c, perm[a]);
    Matrix permuted = gal::corr_unseen(gal::make_attribute_matrix(permuted_values), class_set);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(permuted(i, j) == doctest::Approx(base(perm[i], perm[j])).epsilon(1e-12));
}

TEST_CASE("summarize: upper-triangle statistics") {
    // 3x3 with upper triangle {0.1, 0.2, 0.3}: mean 0.2, top-ceil(3/2)=2 mean 0.25.
    Matrix d3 = from_rows({{0, 0.1, 0.2}, {0.1, 0, 0.3}, {0.2, 0.3, 0}});
    auto s3 = gal::summarize(d3);
    CHECK(s3.mean == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s3.mean_at_top_half == doctest::Approx(0.25).epsilon(1e-12));

    // 4x4 with upper triangle {0.1, 0.2, 0.3, 0.4, 0.0, 0.5}: mean 0.25,
    // top 3 of 6 -> (0.5 + 0.4 + 0.3) / 3.
    Matrix d4(4, 4);
    double tri[] = {0.1, 0.2, 0.3, 0.4, 0.0, 0.5};
    int k = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            d4(i, j) = tri[k];
            d4(j, i) = tri[k];
            ++k;
        }
    auto s4 = gal::summarize(d4);
    CHECK(s4.mean == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s4.mean_at_top_half == doctest::Approx(0.4).epsilon(1e-12));

    auto zero = gal::summarize(Matrix(5, 5));
    CHECK(zero.mean == 0.0);
    CHECK(zero.mean_at_top_half == 0.0);

    CHECK_THROWS_AS((void)gal::summarize(Matrix(1, 1)), gal::DimensionError);
    CHECK_THROWS_AS((void)gal::summarize(Matrix(2, 3)), gal::DimensionError);
}

TEST_CASE("group_delta: worked examples") {
    Matrix d = from_rows({{0, 0.2, 0.7}, {0.2, 0, 0.1}, {0.7, 0.1, 0}});
    gal::Grouping g;
    g.assignment = {0, 1, 1};
    g.L = 2;
    Matrix gd = gal::group_delta(d, g);
    REQUIRE(gd.rows() == 2);
    CHECK(gd(0, 1) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(gd(1, 0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(gd(0, 0) == 0.0);
    CHECK(gd(1, 1) == 0.0);

    gal::Grouping single;
    single.assignment = {0, 0, 0};
    single.L = 1;
    Matrix one = gal::group_delta(d, single);
    REQUIRE(one.rows() == 1);
    CHECK(one(0, 0) == 0.0);
}

TEST_CASE("group_delta: matches an exhaustive max oracle") {
    gal::Rng rng(68);
    for (int t = 0; t < 20; ++t) {
        std::size_t D = 4 + rng.index(6);
        int L = 2 + static_cast<int>(rng.index(3));
        Matrix delta(D, D);
        for (std::size_t i = 0; i < D; ++i)
            for (std::size_t j = i + 1; j < D; ++j) {
                double v = rng.uniform(0.0, 2.0);
                delta(i, j) = v;
                delta(j, i) = v;
            }
        gal::Grouping g;
        g.L = L;
        g.assignment.resize(D);
        for (std::size_t a = 0; a < D; ++a)
            g.assignment[a] = a < static_cast<std::size_t>(L) ? static_cast<int>(a)
                                                              : static_cast<int>(rng.index(L));
        Matrix gd = gal::group_delta(delta, g);
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) {
                if (i == j) {
                    CHECK(gd(i, j) == 0.0);
                    continue;
                }
                double best = 0.0;
                for (std::size_t a = 0; a < D; ++a)
                    for (std::size_t b = 0; b < D; ++b)
                        if (g.assignment[a] == i && g.assignment[b] == j)
                            best = std::max(best, delta(a, b));
                CHECK(gd(i, j) == doctest::Approx(best).epsilon(1e-12));
            }
    }
    Matrix d(3, 3);
    gal::Grouping wrong;
    wrong.assignment = {0, 1};
    wrong.L = 2;
    CHECK_THROWS_AS((void)gal::group_delta(d, wrong), gal::DimensionError);
}

TEST_CASE("attribute matrix: validation") {
    auto good = gal::make_attribute_matrix(from_rows({{1, 0}, {0, 1}}));
    CHECK_NOTHROW(good.validate());
    auto bad = good;
    bad.binarized.pop_back();
    CHECK_THROWS_AS(bad.validate(), gal::DimensionError);
    auto bad2 = good;
    bad2.num_attributes = 3;
    CHECK_THROWS_AS(bad2.validate(), gal::DimensionError);
}
