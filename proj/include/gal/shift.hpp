#pragma once
#include <cstdint>
#include <vector>

#include "gal/matrix.hpp"

namespace gal {

// Class-attribute matrix: raw values plus the binarized view used by the
// correlation estimates and adversarial targets.
struct AttributeMatrix {
    std::size_t num_classes = 0;
    std::size_t num_attributes = 0;
    Matrix values;                        // C x D
    std::vector<std::uint8_t> binarized;  // C x D, row-major

    std::uint8_t bin(std::size_t c, std::size_t a) const { return binarized[c * num_attributes + a]; }
    void validate() const;
};

// Threshold each attribute at its mean over all classes (strict >). Inputs
// that are already 0/1 pass through unchanged; the operation is idempotent.
std::vector<std::uint8_t> binarize_attributes(const Matrix& values);

// Phi coefficient (Pearson correlation of two binary variables); 0 whenever
// either variable is constant.
double pearson_binary(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

// Pairwise phi over seen-train instances: each instance inherits its class's
// binarized attribute row, so classes are weighted by train frequency.
Matrix corr_seen(const AttributeMatrix& attrs, const std::vector<int>& labels,
                 const std::vector<int>& train_classes);

// Pairwise phi treating each listed class row as one equally-weighted sample.
Matrix corr_unseen(const AttributeMatrix& attrs, const std::vector<int>& class_set);

// Correlation shift of one attribute pair: max{ sgn(rho_seen) * (rho_seen -
// rho_unseen), 0 }, with sgn(0) = 0.
double delta_corr(double rho_seen, double rho_unseen);

Matrix delta_corr_matrix(const Matrix& seen, const Matrix& unseen);

struct ShiftSummary {
    double mean = 0.0;
    double mean_at_top_half = 0.0;  // mean of the largest ceil(M/2) upper-triangle entries
};
ShiftSummary summarize(const Matrix& delta);

// Grouping lives in grouping.hpp; declared here to type group_delta.
struct Grouping;

// L x L matrix of the maximal pairwise shift between members of two groups;
// diagonal set to 0.
Matrix group_delta(const Matrix& delta, const Grouping& grouping);

} // namespace gal
