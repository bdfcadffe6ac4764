#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "gal/matrix.hpp"
#include "gal/rng.hpp"

namespace gal {

// Two-label synthetic laboratory: a pair of correlated Bernoulli labels, each
// driving one 5-dim Gaussian block of a 10-dim feature vector. The primary
// label's correlation with the auxiliary label is set independently for the
// train draw and each test draw, holding class-conditional feature
// distributions fixed, which produces pure target shift.
struct SynthConfig {
    double separation = 1.5;     // ||mu1 - mu0|| within each 5-dim block
    double train_rho = 0.6;      // label correlation of the train draw
    std::vector<double> test_rhos = {-1.0, -0.8, -0.6, -0.4, -0.2, 0.0,
                                     0.2,  0.4,  0.6,  0.8,  1.0};
    std::size_t n_train = 1000;
    std::size_t n_test = 50000;
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LabelPair {
    std::uint8_t y_p = 0;  // primary label
    std::uint8_t y_a = 0;  // auxiliary label
};

// Joint draw with P(1,1) = P(0,0) = (1+rho)/4 and P(1,0) = P(0,1) = (1-rho)/4,
// so both marginals are 0.5 and corr(y_p, y_a) = rho.
std::vector<LabelPair> sample_labels(double rho, std::size_t n, Rng& rng);

// n x 10 features: dims 0-4 ~ N(y_p * mu, I), dims 5-9 ~ N(y_a * mu, I) with
// mu = (sep/sqrt(5)) * (1,...,1), so the class means are `sep` apart.
Matrix gen_features(const std::vector<LabelPair>& labels, double sep, Rng& rng);

// Accuracy of the optimal rule for two equal-prior unit-covariance Gaussians
// `sep` apart: Phi(sep / 2).
double bayes_accuracy(double sep);

// Accuracy on y_p of the classifier built from the true class means
// (weights mu1 - mu0 on the primary block, midpoint threshold).
double oracle_accuracy(const Matrix& x, const std::vector<LabelPair>& labels, double sep);

enum class SynthModel {
    baseline,         // 10 -> 1 logistic regression on y_p
    baseline_hidden,  // 10 -> 2 -> 1, same task, no auxiliary signal
    sharing,          // 10 -> 2 -> 2, joint prediction of y_p and y_a
    adversary,        // 10 -> 2 encoder, y_p head, y_a head behind reversal
};
std::string to_string(SynthModel m);

struct SynthRun {
    SynthModel model = SynthModel::baseline;
    double lambda = 0.0;              // reversal strength; 0 for other models
    std::vector<double> accuracy;     // on y_p, one entry per test grid point
    std::vector<double> weights;      // effective input->y_p weights (10 values)
    double aux_weight_signed = 0.0;   // sum of weights on dims 5-9
    double aux_weight_abs = 0.0;      // sum of |weights| on dims 5-9
};

// Trains one model on the given train set and scores it on every test set.
// All models are linear (no activations between layers); training is plain
// minibatch SGD. `seed` controls weight init and batch shuffling through two
// separate derived streams, so models that share a layer prefix (hidden
// baseline vs adversary) see identical draws for the shared layers.
SynthRun train_synth_model(SynthModel model, double lambda, const SynthConfig& cfg,
                           const Matrix& train_x, const std::vector<LabelPair>& train_y,
                           const std::vector<Matrix>& test_x,
                           const std::vector<std::vector<LabelPair>>& test_y,
                           std::uint64_t seed);

struct SuiteResult {
    std::vector<double> test_rhos;
    std::vector<SynthRun> runs;
};

// One train draw at train_rho, one test draw per grid point, then baseline,
// hidden baseline, sharing, and one adversary per lambda, all on the same
// data. Throws if a label is single-valued in the train draw.
SuiteResult run_two_label_suite(const SynthConfig& cfg, const std::vector<double>& lambda_list);

} // namespace gal
