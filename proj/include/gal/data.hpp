#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "gal/matrix.hpp"
#include "gal/shift.hpp"

namespace gal {

struct SplitDef {
    std::vector<int> train_classes;
    std::vector<int> val_classes;  // may be empty
    std::vector<int> test_classes;

    void validate(std::size_t num_classes) const;
    std::vector<int> seen_classes() const;  // train followed by val
};

struct Dataset {
    Matrix features;          // N x d
    std::vector<int> labels;  // N class ids
    AttributeMatrix attributes;
    SplitDef split;

    std::size_t num_instances() const { return labels.size(); }
    std::size_t feature_dim() const { return features.cols(); }
    void validate() const;
};

// Directory layout: features.bin (magic "GALF", u32 version 1, u64 N, u64 d,
// N*d float32 row-major little-endian), labels.txt (N lines of 0-based class
// ids), attributes.csv (header attr_0..attr_{D-1}, then C rows), splits.txt
// (lines "train:", "val:", "test:" with class ids).
Dataset load_dataset(const std::string& dir);
void save_dataset(const Dataset& ds, const std::string& dir);

SplitDef load_split(const std::string& path, std::size_t num_classes);
void save_split(const SplitDef& split, const std::string& path);

AttributeMatrix make_attribute_matrix(Matrix values);

struct SplitCounts {
    int n_train = 0;
    int n_val = 0;
    int n_test = 0;
};

// Build a class split that maximizes the mean pairwise correlation shift
// between non-test and test classes (then val against train by the same
// criterion). Searches exhaustively when the subset count is small enough,
// otherwise beam search over greedy extensions plus swap refinement;
// beam_width 1 with no refinement reproduces a plain greedy construction.
SplitDef cs_split(const AttributeMatrix& attrs, SplitCounts counts, std::uint64_t seed,
                  int beam_width = 16, bool swap_refine = true,
                  std::size_t exhaustive_limit = 250000);

// Mean shift between one class set's rows and another's (upper-triangle mean
// over attribute pairs); the objective cs_split maximizes.
double split_shift_objective(const AttributeMatrix& attrs, const std::vector<int>& held,
                             const std::vector<int>& test);

struct SplitAudit {
    ShiftSummary shift;  // seen(train+val instances) vs unseen(test class rows)
    std::size_t train_instances = 0;
    std::size_t val_instances = 0;
    std::size_t test_instances = 0;
};
SplitAudit split_audit(const Dataset& ds);

} // namespace gal
