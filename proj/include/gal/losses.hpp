#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "gal/matrix.hpp"

namespace gal {

enum class LossKind { ale, devise, sje, softmax };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d scores (same length as scores)
};

// Compatibility scores: dot product of the attribute-score vector with each
// candidate class's attribute row (raw values).
std::vector<double> class_scores(const std::vector<double>& attr_scores, const Matrix& phi,
                                 const std::vector<int>& class_set);

// Rank hinge summed over all violators: sum_{c != y} max(0, margin - s_y + s_c).
LossResult loss_devise(const std::vector<double>& scores, std::size_t y, double margin);

// Max-violator hinge: [max_{c != y} (margin + s_c - s_y)]_+ with first-index
// tie-break on the argmax.
LossResult loss_sje(const std::vector<double>& scores, std::size_t y, double margin);

// Rank-weighted hinge: (beta_r / r) * sum over violators of the hinge terms,
// beta_r = sum_{i=1..r} 1/i.
LossResult loss_ale(const std::vector<double>& scores, std::size_t y, double margin);

// -log softmax(scores)[y], stabilized by max subtraction.
LossResult loss_softmax_ce(const std::vector<double>& scores, std::size_t y);

// Balanced binary cross-entropy over probabilities in (0,1): positive and
// negative terms are each normalized by their own count (factor 1/(2n)); an
// empty side contributes 0. Probabilities are clamped to [1e-7, 1-1e-7];
// the gradient is taken with respect to the clamped value.
LossResult loss_balanced_bce(const std::vector<double>& probs, const std::vector<std::uint8_t>& targets);

} // namespace gal
