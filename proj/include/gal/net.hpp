#pragma once
#include <functional>
#include <vector>

#include "gal/matrix.hpp"
#include "gal/rng.hpp"

namespace gal {

struct OptimizerConfig {
    double learning_rate = 0.01;
    double momentum = 0.0;       // in [0, 1)
    double weight_decay = 0.0;   // L2 coefficient; applied only where configured
    bool nesterov = false;

    void validate() const;
};

// Fully-connected layer y = x W + b with cached input for the backward pass
// and per-parameter velocity buffers for momentum SGD.
class DenseLayer {
public:
    DenseLayer() = default;
    // Weights drawn uniformly from [-1/sqrt(d_in), +1/sqrt(d_in)].
    DenseLayer(std::size_t d_in, std::size_t d_out, Rng& rng);

    std::size_t d_in() const { return W.rows(); }
    std::size_t d_out() const { return W.cols(); }

    Matrix forward(const Matrix& x);
    // Requires a prior forward; returns dX and fills dW, db.
    Matrix backward(const Matrix& dy, Matrix& dW, std::vector<double>& db);

    Matrix W;
    std::vector<double> b;
    Matrix vW;
    std::vector<double> vb;

private:
    Matrix cached_x_;
    bool has_cache_ = false;
};

// One momentum-SGD step: g' = g + weight_decay*w; v <- mu*v + g';
// w <- w - lr*(g' + mu*v) when nesterov, else w <- w - lr*v.
void sgd_nesterov_step(DenseLayer& layer, const Matrix& dW, const std::vector<double>& db,
                       const OptimizerConfig& cfg);

// Gradient reversal: forward is identity, backward is -scale * dY.
struct GradReverse {
    double scale = 1.0;
    Matrix forward(const Matrix& x) const { return x; }
    Matrix backward(const Matrix& dy) const;
};

Matrix sigmoid(const Matrix& x);
// dL/dx given y = sigmoid(x) and dL/dy.
Matrix sigmoid_backward(const Matrix& y, const Matrix& dy);

Matrix softmax_rows(const Matrix& x);

// Inverted dropout. In train mode zeroes entries with probability p and
// scales survivors by 1/(1-p); in eval mode it is the identity. The mask is
// cached for the backward pass.
class Dropout {
public:
    explicit Dropout(double p = 0.0);
    Matrix forward(const Matrix& x, Rng& rng, bool train);
    Matrix backward(const Matrix& dy) const;
    const Matrix& mask() const { return mask_; }

private:
    double p_;
    Matrix mask_;
    bool identity_ = true;
};

// Central-difference gradient check. `loss` re-evaluates the objective from
// current parameter values; `params`/`analytic` reference the same layout.
// Returns the worst relative error max(|fd-an|) / max(|fd|,|an|,1e-8).
double finite_diff_check(const std::function<double()>& loss, double* params, const double* analytic,
                         std::size_t count, double eps);

} // namespace gal
