#include "gal/shift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gal/errors.hpp"
#include "gal/grouping.hpp"

namespace gal {

void AttributeMatrix::validate() const {
    if (values.rows() != num_classes || values.cols() != num_attributes)
        throw DimensionError("attribute matrix: values shape mismatch");
    if (binarized.size() != num_classes * num_attributes)
        throw DimensionError("attribute matrix: binarized size mismatch");
    values.check_finite("attribute matrix");
}

std::vector<std::uint8_t> binarize_attributes(const Matrix& values) {
    values.check_finite("binarize_attributes");
    std::size_t C = values.rows(), D = values.cols();
    std::vector<std::uint8_t> out(C * D, 0);
    for (std::size_t a = 0; a < D; ++a) {
        double mean = 0.0;
        for (std::size_t c = 0; c < C; ++c) mean += values(c, a);
        mean /= static_cast<double>(C);
        for (std::size_t c = 0; c < C; ++c) out[c * D + a] = values(c, a) > mean ? 1 : 0;
    }
    return out;
}

namespace {

// Phi coefficient from exact counts; 0 when either variable is constant.
// Clamped: division rounding can push a perfectly aligned pair a few ulp
// past +/-1, which downstream range checks would reject.
double phi_from_counts(double n, double n_a, double n_b, double n_ab) {
    if (n_a <= 0.0 || n_a >= n || n_b <= 0.0 || n_b >= n) return 0.0;
    double pa = n_a / n, pb = n_b / n, pab = n_ab / n;
    double denom = std::sqrt(pa * (1.0 - pa) * pb * (1.0 - pb));
    return std::clamp((pab - pa * pb) / denom, -1.0, 1.0);
}

// Pairwise phi over class rows weighted by per-class counts.
Matrix weighted_phi(const AttributeMatrix& attrs, const std::vector<int>& class_set,
                    const std::vector<double>& weights) {
    std::size_t D = attrs.num_attributes;
    double n = 0.0;
    std::vector<double> n_a(D, 0.0);
    for (std::size_t k = 0; k < class_set.size(); ++k) {
        n += weights[k];
        auto c = static_cast<std::size_t>(class_set[k]);
        for (std::size_t a = 0; a < D; ++a)
            if (attrs.bin(c, a)) n_a[a] += weights[k];
    }
    Matrix corr(D, D);
    for (std::size_t a = 0; a < D; ++a) {
        for (std::size_t b = a; b < D; ++b) {
            double n_ab = 0.0;
            for (std::size_t k = 0; k < class_set.size(); ++k) {
                auto c = static_cast<std::size_t>(class_set[k]);
                if (attrs.bin(c, a) && attrs.bin(c, b)) n_ab += weights[k];
            }
            double v = phi_from_counts(n, n_a[a], n_a[b], n_ab);
            corr(a, b) = v;
            corr(b, a) = v;
        }
    }
    return corr;
}

} // namespace

double pearson_binary(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    if (a.size() != b.size()) throw DimensionError("pearson_binary: length mismatch");
    if (a.size() < 2) throw InputError("pearson_binary: need at least 2 samples");
    double n = static_cast<double>(a.size());
    double n_a = 0.0, n_b = 0.0, n_ab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        n_a += (a[i] != 0);
        n_b += (b[i] != 0);
        n_ab += (a[i] != 0 && b[i] != 0);
    }
    return phi_from_counts(n, n_a, n_b, n_ab);
}

Matrix corr_seen(const AttributeMatrix& attrs, const std::vector<int>& labels,
                 const std::vector<int>& train_classes) {
    if (train_classes.empty()) throw InputError("corr_seen: empty train class set");
    std::vector<double> counts(train_classes.size(), 0.0);
    std::vector<int> pos(attrs.num_classes, -1);
    for (std::size_t k = 0; k < train_classes.size(); ++k) {
        int c = train_classes[k];
        if (c < 0 || static_cast<std::size_t>(c) >= attrs.num_classes)
            throw InputError("corr_seen: train class " + std::to_string(c) + " out of range");
        pos[static_cast<std::size_t>(c)] = static_cast<int>(k);
    }
    double total = 0.0;
    for (int y : labels) {
        if (y >= 0 && static_cast<std::size_t>(y) < attrs.num_classes && pos[static_cast<std::size_t>(y)] >= 0) {
            counts[static_cast<std::size_t>(pos[static_cast<std::size_t>(y)])] += 1.0;
            total += 1.0;
        }
    }
    if (total < 2.0) throw InputError("corr_seen: fewer than 2 train instances");
    return weighted_phi(attrs, train_classes, counts);
}

Matrix corr_unseen(const AttributeMatrix& attrs, const std::vector<int>& class_set) {
    if (class_set.size() < 2) throw InputError("corr_unseen: need at least 2 classes");
    for (int c : class_set)
        if (c < 0 || static_cast<std::size_t>(c) >= attrs.num_classes)
            throw InputError("corr_unseen: class " + std::to_string(c) + " out of range");
    std::vector<double> weights(class_set.size(), 1.0);
    return weighted_phi(attrs, class_set, weights);
}

double delta_corr(double rho_seen, double rho_unseen) {
    if (rho_seen < -1.0 || rho_seen > 1.0 || rho_unseen < -1.0 || rho_unseen > 1.0)
        throw InputError("delta_corr: correlations must lie in [-1, 1]");
    double sgn = rho_seen > 0.0 ? 1.0 : (rho_seen < 0.0 ? -1.0 : 0.0);
    return std::max(sgn * (rho_seen - rho_unseen), 0.0);
}

Matrix delta_corr_matrix(const Matrix& seen, const Matrix& unseen) {
    if (seen.rows() != unseen.rows() || seen.cols() != unseen.cols() || seen.rows() != seen.cols())
        throw DimensionError("delta_corr_matrix: correlation matrices must be square and equal-sized");
    std::size_t D = seen.rows();
    Matrix delta(D, D);
    for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = 0; b < D; ++b)
            delta(a, b) = a == b ? 0.0 : delta_corr(seen(a, b), unseen(a, b));
    return delta;
}

ShiftSummary summarize(const Matrix& delta) {
    if (delta.rows() != delta.cols() || delta.rows() < 2)
        throw DimensionError("summarize: need a square matrix with D >= 2");
    std::vector<double> upper;
    upper.reserve(delta.rows() * (delta.rows() - 1) / 2);
    for (std::size_t a = 0; a < delta.rows(); ++a)
        for (std::size_t b = a + 1; b < delta.cols(); ++b) upper.push_back(delta(a, b));
    ShiftSummary s;
    for (double v : upper) s.mean += v;
    s.mean /= static_cast<double>(upper.size());
    std::size_t top = (upper.size() + 1) / 2;
    std::sort(upper.begin(), upper.end(), std::greater<double>());
    for (std::size_t i = 0; i < top; ++i) s.mean_at_top_half += upper[i];
    s.mean_at_top_half /= static_cast<double>(top);
    return s;
}

Matrix group_delta(const Matrix& delta, const Grouping& grouping) {
    grouping.validate();
    if (grouping.assignment.size() != delta.rows())
        throw DimensionError("group_delta: grouping covers " + std::to_string(grouping.assignment.size()) +
                             " attributes but delta is " + std::to_string(delta.rows()) + "-dimensional");
    auto groups = grouping.groups();
    Matrix out(static_cast<std::size_t>(grouping.L), static_cast<std::size_t>(grouping.L));
    for (int i = 0; i < grouping.L; ++i) {
        for (int j = i + 1; j < grouping.L; ++j) {
            double mx = 0.0;
            for (int a : groups[static_cast<std::size_t>(i)])
                for (int b : groups[static_cast<std::size_t>(j)])
                    mx = std::max(mx, delta(static_cast<std::size_t>(a), static_cast<std::size_t>(b)));
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = mx;
            out(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = mx;
        }
    }
    return out;
}

} // namespace gal
