#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "gal/matrix.hpp"
#include "gal/rng.hpp"

namespace gal {

// Partition of attribute indices into L non-empty groups.
struct Grouping {
    std::vector<int> assignment;  // attribute index -> group id in [0, L)
    int L = 0;

    std::vector<std::vector<int>> groups() const;
    void validate() const;
};

// Affinity from a shift matrix: A[i][j] = (max(delta) - delta[i][j]) + eps,
// diagonal max(delta) + eps. Low shift between two attributes means high
// affinity, so strongly shifting pairs land in different groups.
Matrix affinity_from_delta(const Matrix& delta);

// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns eigenpairs
// sorted by descending eigenvalue; eigenvectors are the columns of `vectors`.
struct EigenResult {
    std::vector<double> values;
    Matrix vectors;
};
EigenResult jacobi_eigen(const Matrix& sym, double tol = 1e-10, int max_sweeps = 100);

// k-means with k-means++ seeding and Lloyd iterations to a fixpoint (or
// max_iter); an empty cluster is repaired by stealing the farthest point.
std::vector<int> kmeans(const Matrix& points, int k, Rng& rng, int max_iter = 300);

// Bipartite spectral co-clustering of a symmetric affinity matrix:
// normalize An = D1^-1/2 A D2^-1/2, take the ceil(log2 L) singular vector
// pairs after the first (via eigendecomposition of An^T An), embed rows
// scaled by D1^-1/2, and cluster the embedding with seeded k-means.
Grouping spectral_cocluster(const Matrix& affinity, int L, std::uint64_t seed);

// Grouping file format: one group per line, "<group_id>: <attr> <attr> ...",
// 0-based, '#' starts a comment.
Grouping load_grouping(const std::string& path, std::size_t num_attributes);
void save_grouping(const Grouping& g, const std::string& path);

} // namespace gal
