#include "gal/net.hpp"

#include <cmath>
#include <string>

#include "gal/errors.hpp"

namespace gal {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InputError("optimizer: learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw InputError("optimizer: momentum must be in [0,1)");
    if (weight_decay < 0.0) throw InputError("optimizer: weight_decay must be >= 0");
}

DenseLayer::DenseLayer(std::size_t d_in, std::size_t d_out, Rng& rng) {
    double lim = 1.0 / std::sqrt(static_cast<double>(d_in));
    W = Matrix::uniform(d_in, d_out, -lim, lim, rng);
    b.assign(d_out, 0.0);
    for (auto& x : b) x = rng.uniform(-lim, lim);
    vW = Matrix(d_in, d_out);
    vb.assign(d_out, 0.0);
}

Matrix DenseLayer::forward(const Matrix& x) {
    if (x.cols() != W.rows())
        throw DimensionError("dense forward: input cols " + std::to_string(x.cols()) +
                             " != d_in " + std::to_string(W.rows()));
    cached_x_ = x;
    has_cache_ = true;
    Matrix y = matmul(x, W);
    add_row_vector(y, b);
    return y;
}

Matrix DenseLayer::backward(const Matrix& dy, Matrix& dW, std::vector<double>& db) {
    if (!has_cache_) throw StateError("dense backward called before forward");
    if (dy.rows() != cached_x_.rows() || dy.cols() != W.cols())
        throw DimensionError("dense backward: dY shape mismatch");
    dW = matmul_tn(cached_x_, dy);
    db = col_sums(dy);
    return matmul_nt(dy, W);
}

namespace {
void step_block(std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g,
                const OptimizerConfig& cfg) {
    for (double x : g)
        if (!std::isfinite(x)) throw NumericError("sgd step: non-finite gradient");
    for (std::size_t i = 0; i < w.size(); ++i) {
        double gp = g[i] + cfg.weight_decay * w[i];
        v[i] = cfg.momentum * v[i] + gp;
        if (cfg.nesterov)
            w[i] -= cfg.learning_rate * (gp + cfg.momentum * v[i]);
        else
            w[i] -= cfg.learning_rate * v[i];
    }
}
} // namespace

void sgd_nesterov_step(DenseLayer& layer, const Matrix& dW, const std::vector<double>& db,
                       const OptimizerConfig& cfg) {
    if (dW.rows() != layer.W.rows() || dW.cols() != layer.W.cols() || db.size() != layer.b.size())
        throw DimensionError("sgd step: gradient shape mismatch");
    step_block(layer.W.raw(), layer.vW.raw(), dW.raw(), cfg);
    step_block(layer.b, layer.vb, db, cfg);
}

Matrix GradReverse::backward(const Matrix& dy) const {
    Matrix out = dy;
    for (auto& x : out.raw()) x = -scale * x;
    return out;
}

Matrix sigmoid(const Matrix& x) {
    Matrix y = x;
    for (auto& v : y.raw()) {
        if (v >= 0.0) {
            v = 1.0 / (1.0 + std::exp(-v));
        } else {
            double e = std::exp(v);
            v = e / (1.0 + e);
        }
    }
    return y;
}

Matrix sigmoid_backward(const Matrix& y, const Matrix& dy) {
    if (y.rows() != dy.rows() || y.cols() != dy.cols())
        throw DimensionError("sigmoid backward: shape mismatch");
    Matrix dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        double s = y.raw()[i];
        dx.raw()[i] *= s * (1.0 - s);
    }
    return dx;
}

Matrix softmax_rows(const Matrix& x) {
    Matrix y = x;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        double* r = y.row(i);
        double mx = r[0];
        for (std::size_t j = 1; j < y.cols(); ++j) mx = std::max(mx, r[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < y.cols(); ++j) {
            r[j] = std::exp(r[j] - mx);
            sum += r[j];
        }
        for (std::size_t j = 0; j < y.cols(); ++j) r[j] /= sum;
    }
    return y;
}

Dropout::Dropout(double p) : p_(p) {
    if (p < 0.0 || p > 0.9) throw InputError("dropout: p must be in [0, 0.9]");
}

Matrix Dropout::forward(const Matrix& x, Rng& rng, bool train) {
    if (!train || p_ == 0.0) {
        identity_ = true;
        return x;
    }
    identity_ = false;
    mask_ = Matrix(x.rows(), x.cols());
    double keep_scale = 1.0 / (1.0 - p_);
    Matrix y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double m = (rng.uniform() < p_) ? 0.0 : keep_scale;
        mask_.raw()[i] = m;
        y.raw()[i] *= m;
    }
    return y;
}

Matrix Dropout::backward(const Matrix& dy) const {
    if (identity_) return dy;
    if (dy.rows() != mask_.rows() || dy.cols() != mask_.cols())
        throw DimensionError("dropout backward: shape mismatch");
    Matrix dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i) dx.raw()[i] *= mask_.raw()[i];
    return dx;
}

double finite_diff_check(const std::function<double()>& loss, double* params, const double* analytic,
                         std::size_t count, double eps) {
    if (eps < 1e-6 || eps > 1e-3) throw InputError("finite_diff_check: eps must lie in [1e-6, 1e-3]");
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double saved = params[i];
        params[i] = saved + eps;
        double fp = loss();
        params[i] = saved - eps;
        double fm = loss();
        params[i] = saved;
        double fd = (fp - fm) / (2.0 * eps);
        double denom = std::max({std::fabs(fd), std::fabs(analytic[i]), 1e-8});
        worst = std::max(worst, std::fabs(fd - analytic[i]) / denom);
    }
    return worst;
}

} // namespace gal
