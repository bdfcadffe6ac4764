#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gal/grouping.hpp"
#include "gal/losses.hpp"
#include "gal/matrix.hpp"
#include "gal/net.hpp"
#include "gal/shift.hpp"

namespace gal {

enum class TrunkMode { shared, per_group };
enum class WeightingMode { delta_corr, equal };

TrunkMode trunk_mode_from_string(const std::string& s);
WeightingMode weighting_mode_from_string(const std::string& s);
std::string to_string(TrunkMode m);
std::string to_string(WeightingMode m);

struct GalConfig {
    std::size_t input_dim = 0;
    std::size_t trunk_width = 500;
    std::size_t group_width = 100;
    TrunkMode trunk_mode = TrunkMode::shared;
    LossKind loss = LossKind::sje;
    double lambda = 0.0;   // adversarial weight, >= 0
    double margin = 1.0;
    double dropout_p = 0.0;
    double l2 = 0.0;       // applied to primary and adversarial arm layers only
    WeightingMode weighting = WeightingMode::delta_corr;
    OptimizerConfig optimizer{0.01, 0.9, 0.0, true};
    std::size_t batch_size = 64;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;

    void validate() const;
    std::string echo() const;  // key=value lines
};

struct Batch {
    Matrix features;                         // n x d
    std::vector<int> labels;                 // n global class ids
    std::vector<std::uint8_t> attr_targets;  // n x D binarized class rows
};

Batch make_batch(const Matrix& features, const std::vector<int>& labels,
                 const AttributeMatrix& attrs, const std::vector<std::size_t>& idx);

// Selects the raw attribute rows of the given classes (k x D).
Matrix phi_rows(const AttributeMatrix& attrs, const std::vector<int>& class_set);

struct ForwardResult {
    Matrix attr_scores;             // n x D, original attribute order
    std::vector<Matrix> adv_probs;  // per adversarial arm, n x |group j|
};

struct StepMetrics {
    double zsl_loss = 0.0;
    std::vector<double> adv_losses;  // per arm, unscaled balanced BCE
    double grad_norm = 0.0;
};

// Grouped adversarial network: a trunk (shared or per group), L group
// extractors, L primary scoring arms, and one adversarial arm per ordered
// group pair with positive shift weight. Adversarial arms predict the other
// group's attributes from a group's latent; their gradient reaches the
// latent reversed and scaled by lambda * delta_ij, so the extractor learns
// to remove that information while the arm itself learns to recover it.
class GalNetwork {
public:
    GalNetwork() = default;
    GalNetwork(const GalConfig& cfg, Grouping grouping, const Matrix& delta_ij);

    ForwardResult forward(const Matrix& x, Rng& rng, bool train);
    StepMetrics training_step(const Batch& batch, const AttributeMatrix& attrs,
                              const std::vector<int>& train_classes, Rng& rng);
    std::vector<int> predict_classes(const Matrix& x, const AttributeMatrix& attrs,
                                     const std::vector<int>& class_set);

    const GalConfig& config() const { return cfg_; }
    const Grouping& grouping() const { return grouping_; }
    const Matrix& delta_ij() const { return delta_ij_; }  // effective weights
    std::size_t num_primary_arms() const { return primaries_.size(); }
    std::size_t num_adversarial_arms() const { return arms_.size(); }

    struct Arm {
        int i = 0;
        int j = 0;
        DenseLayer layer;
    };

    // parameter access (checkpointing, equivalence tests, gradient checks)
    std::vector<DenseLayer>& trunks() { return trunks_; }
    std::vector<DenseLayer>& extractors() { return extractors_; }
    std::vector<DenseLayer>& primaries() { return primaries_; }
    std::vector<Arm>& arms() { return arms_; }
    const std::vector<DenseLayer>& trunks() const { return trunks_; }
    const std::vector<DenseLayer>& extractors() const { return extractors_; }
    const std::vector<DenseLayer>& primaries() const { return primaries_; }
    const std::vector<Arm>& arms() const { return arms_; }

    void save(const std::string& path) const;
    static GalNetwork load(const std::string& path);

private:
    GalConfig cfg_;
    Grouping grouping_;
    Matrix delta_ij_;
    std::vector<std::vector<int>> group_attrs_;  // ascending attribute ids per group
    std::vector<DenseLayer> trunks_;             // size 1 (shared) or L (per group)
    std::vector<DenseLayer> extractors_;
    std::vector<DenseLayer> primaries_;
    std::vector<Arm> arms_;
    std::vector<Dropout> trunk_drop_;
    std::vector<Dropout> extr_drop_;
};

// Minimal single-path model with the same layer stack (trunk -> extractor ->
// scoring head) and the same losses, implemented independently of
// GalNetwork. Serves as the no-adversary baseline.
class PlainZslModel {
public:
    PlainZslModel() = default;
    PlainZslModel(const GalConfig& cfg, std::size_t num_attributes);

    Matrix forward(const Matrix& x, Rng& rng, bool train);
    double training_step(const Batch& batch, const AttributeMatrix& attrs,
                         const std::vector<int>& train_classes, Rng& rng);
    std::vector<int> predict_classes(const Matrix& x, const AttributeMatrix& attrs,
                                     const std::vector<int>& class_set);

    DenseLayer trunk, extractor, head;

private:
    GalConfig cfg_;
    Dropout trunk_drop_{0.0}, extr_drop_{0.0};
};

// Shared per-sample loss dispatch over candidate-class scores.
LossResult zsl_loss(LossKind kind, const std::vector<double>& scores, std::size_t y, double margin);

// Argmax class with lowest-index tie-break, one prediction per row of scores.
std::vector<int> argmax_classes(const Matrix& class_score_rows, const std::vector<int>& class_set);

} // namespace gal
