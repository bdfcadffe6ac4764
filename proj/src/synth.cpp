#include "gal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gal/errors.hpp"
#include "gal/net.hpp"

namespace gal {

namespace {

constexpr std::size_t kDim = 10;
constexpr std::size_t kBlock = 5;

// Stable logistic BCE on logits; returns mean loss and writes d(loss)/d(logit).
double bce_on_logits(const Matrix& z, const std::vector<std::uint8_t>& y, std::size_t col,
                     Matrix& dz) {
    double total = 0.0;
    std::size_t n = z.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double zi = z(i, col);
        double yi = static_cast<double>(y[i]);
        total += std::max(zi, 0.0) - zi * yi + std::log1p(std::exp(-std::abs(zi)));
        double p = 1.0 / (1.0 + std::exp(-zi));
        dz(i, col) = (p - yi) / static_cast<double>(n);
    }
    return total / static_cast<double>(n);
}

std::vector<std::uint8_t> primary_of(const std::vector<LabelPair>& labels) {
    std::vector<std::uint8_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i].y_p;
    return out;
}

std::vector<std::uint8_t> auxiliary_of(const std::vector<LabelPair>& labels) {
    std::vector<std::uint8_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i].y_a;
    return out;
}

double accuracy_from_logits(const Matrix& z, std::size_t col, const std::vector<std::uint8_t>& y) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < z.rows(); ++i)
        if ((z(i, col) > 0.0 ? 1 : 0) == y[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(z.rows());
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& idx, std::size_t lo,
                 std::size_t hi) {
    Matrix out(hi - lo, x.cols());
    for (std::size_t k = lo; k < hi; ++k)
        std::copy(x.row(idx[k]), x.row(idx[k]) + x.cols(), out.row(k - lo));
    return out;
}

} // namespace

void SynthConfig::validate() const {
    if (separation <= 0.0) throw InputError("synth: separation must be > 0");
    if (train_rho < -1.0 || train_rho > 1.0)
        throw InputError("synth: train correlation must be in [-1, 1]");
    for (double r : test_rhos)
        if (r < -1.0 || r > 1.0) throw InputError("synth: test correlation must be in [-1, 1]");
    if (test_rhos.empty()) throw InputError("synth: test correlation grid is empty");
    if (n_train < 2 || n_test < 2) throw InputError("synth: need at least 2 instances per draw");
    if (epochs < 1 || batch_size < 1) throw InputError("synth: epochs and batch size must be >= 1");
    if (learning_rate <= 0.0) throw InputError("synth: learning rate must be > 0");
}

std::vector<LabelPair> sample_labels(double rho, std::size_t n, Rng& rng) {
    if (rho < -1.0 || rho > 1.0) throw InputError("sample_labels: correlation must be in [-1, 1]");
    double p_same = (1.0 + rho) / 4.0;   // each of (0,0) and (1,1)
    double p_diff = (1.0 - rho) / 4.0;   // each of (0,1) and (1,0)
    // cumulative over cells in the order (0,0), (0,1), (1,0), (1,1)
    double c0 = p_same, c1 = c0 + p_diff, c2 = c1 + p_diff;
    std::vector<LabelPair> out(n);
    for (auto& lp : out) {
        double u = rng.uniform();
        if (u < c0) {
            lp = {0, 0};
        } else if (u < c1) {
            lp = {0, 1};
        } else if (u < c2) {
            lp = {1, 0};
        } else {
            lp = {1, 1};
        }
    }
    return out;
}

Matrix gen_features(const std::vector<LabelPair>& labels, double sep, Rng& rng) {
    if (sep <= 0.0) throw InputError("gen_features: separation must be > 0");
    double shift = sep / std::sqrt(static_cast<double>(kBlock));
    Matrix x(labels.size(), kDim);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double mp = labels[i].y_p ? shift : 0.0;
        double ma = labels[i].y_a ? shift : 0.0;
        for (std::size_t d = 0; d < kBlock; ++d) x(i, d) = rng.normal() + mp;
        for (std::size_t d = kBlock; d < kDim; ++d) x(i, d) = rng.normal() + ma;
    }
    return x;
}

double bayes_accuracy(double sep) {
    if (sep < 0.0) throw InputError("bayes_accuracy: separation must be >= 0");
    double x = sep / 2.0;
    return 0.5 * std::erfc(-x / std::sqrt(2.0));  // Phi(x)
}

double oracle_accuracy(const Matrix& x, const std::vector<LabelPair>& labels, double sep) {
    if (x.rows() != labels.size()) throw DimensionError("oracle_accuracy: rows != labels");
    if (x.cols() != kDim) throw DimensionError("oracle_accuracy: expected 10 feature dims");
    double shift = sep / std::sqrt(static_cast<double>(kBlock));
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double score = 0.0;
        for (std::size_t d = 0; d < kBlock; ++d) score += shift * (x(i, d) - shift / 2.0);
        if ((score > 0.0 ? 1 : 0) == labels[i].y_p) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(labels.size());
}

std::string to_string(SynthModel m) {
    switch (m) {
        case SynthModel::baseline: return "baseline";
        case SynthModel::baseline_hidden: return "hidden";
        case SynthModel::sharing: return "sharing";
        case SynthModel::adversary: return "adv";
    }
    throw StateError("to_string: unreachable synth model");
}

SynthRun train_synth_model(SynthModel model, double lambda, const SynthConfig& cfg,
                           const Matrix& train_x, const std::vector<LabelPair>& train_y,
                           const std::vector<Matrix>& test_x,
                           const std::vector<std::vector<LabelPair>>& test_y,
                           std::uint64_t seed) {
    cfg.validate();
    if (lambda < 0.0) throw InputError("train_synth_model: lambda must be >= 0");
    if (train_x.rows() != train_y.size())
        throw DimensionError("train_synth_model: feature rows != label count");
    if (test_x.size() != test_y.size())
        throw DimensionError("train_synth_model: test set / label set count mismatch");
    std::vector<std::uint8_t> yp = primary_of(train_y);
    std::vector<std::uint8_t> ya = auxiliary_of(train_y);
    if (std::all_of(yp.begin(), yp.end(), [&](std::uint8_t v) { return v == yp[0]; }) ||
        std::all_of(ya.begin(), ya.end(), [&](std::uint8_t v) { return v == ya[0]; }))
        throw InputError("train_synth_model: degenerate train draw (a label is single-valued)");

    Rng master(seed);
    Rng init_rng = master.derive(1);
    Rng shuffle_rng = master.derive(2);

    // Shared-prefix contract: every hidden model draws encoder then primary
    // head from the same init stream, so hidden baseline and adversary start
    // from identical shared layers; extra heads are drawn afterwards.
    DenseLayer encoder, primary, extra;
    bool has_encoder = model != SynthModel::baseline;
    switch (model) {
        case SynthModel::baseline:
            primary = DenseLayer(kDim, 1, init_rng);
            break;
        case SynthModel::baseline_hidden:
            encoder = DenseLayer(kDim, 2, init_rng);
            primary = DenseLayer(2, 1, init_rng);
            break;
        case SynthModel::sharing:
            encoder = DenseLayer(kDim, 2, init_rng);
            primary = DenseLayer(2, 2, init_rng);  // col 0 -> y_p, col 1 -> y_a
            break;
        case SynthModel::adversary:
            encoder = DenseLayer(kDim, 2, init_rng);
            primary = DenseLayer(2, 1, init_rng);
            extra = DenseLayer(2, 1, init_rng);  // discriminator on y_a
            break;
    }

    OptimizerConfig opt;
    opt.learning_rate = cfg.learning_rate;
    opt.momentum = 0.0;
    opt.nesterov = false;
    GradReverse reverse{lambda};

    std::size_t n = train_y.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t stop = std::min(start + cfg.batch_size, n);
            Matrix xb = take_rows(train_x, order, start, stop);
            std::vector<std::uint8_t> ypb(stop - start), yab(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                ypb[k - start] = yp[order[k]];
                yab[k - start] = ya[order[k]];
            }

            Matrix h = has_encoder ? encoder.forward(xb) : xb;
            Matrix zp = primary.forward(h);
            Matrix dzp(zp.rows(), zp.cols());
            bce_on_logits(zp, ypb, 0, dzp);
            if (model == SynthModel::sharing) bce_on_logits(zp, yab, 1, dzp);

            Matrix dWp;
            std::vector<double> dbp;
            Matrix dh = primary.backward(dzp, dWp, dbp);

            Matrix dWe, dWx;
            std::vector<double> dbe, dbx;
            if (model == SynthModel::adversary) {
                Matrix za = extra.forward(h);
                Matrix dza(za.rows(), za.cols());
                bce_on_logits(za, yab, 0, dza);
                Matrix dh_adv = extra.backward(dza, dWx, dbx);
                dh += reverse.backward(dh_adv);  // encoder sees -lambda * grad
            }
            if (has_encoder) encoder.backward(dh, dWe, dbe);

            if (has_encoder) sgd_nesterov_step(encoder, dWe, dbe, opt);
            sgd_nesterov_step(primary, dWp, dbp, opt);
            if (model == SynthModel::adversary) sgd_nesterov_step(extra, dWx, dbx, opt);
        }
    }

    SynthRun run;
    run.model = model;
    run.lambda = model == SynthModel::adversary ? lambda : 0.0;
    run.weights.assign(kDim, 0.0);
    if (has_encoder) {
        for (std::size_t d = 0; d < kDim; ++d)
            for (std::size_t k = 0; k < encoder.d_out(); ++k)
                run.weights[d] += encoder.W(d, k) * primary.W(k, 0);
    } else {
        for (std::size_t d = 0; d < kDim; ++d) run.weights[d] = primary.W(d, 0);
    }
    for (std::size_t d = kBlock; d < kDim; ++d) {
        run.aux_weight_signed += run.weights[d];
        run.aux_weight_abs += std::abs(run.weights[d]);
    }

    for (std::size_t t = 0; t < test_x.size(); ++t) {
        Matrix h = has_encoder ? encoder.forward(test_x[t]) : test_x[t];
        Matrix z = primary.forward(h);
        run.accuracy.push_back(accuracy_from_logits(z, 0, primary_of(test_y[t])));
    }
    return run;
}

SuiteResult run_two_label_suite(const SynthConfig& cfg, const std::vector<double>& lambda_list) {
    cfg.validate();
    for (double l : lambda_list)
        if (l < 0.0) throw InputError("run_two_label_suite: lambda must be >= 0");

    Rng master(cfg.seed);
    Rng data_rng = master.derive(10);
    std::vector<LabelPair> train_y = sample_labels(cfg.train_rho, cfg.n_train, data_rng);
    Matrix train_x = gen_features(train_y, cfg.separation, data_rng);

    std::vector<Matrix> test_x;
    std::vector<std::vector<LabelPair>> test_y;
    for (std::size_t k = 0; k < cfg.test_rhos.size(); ++k) {
        Rng test_rng = master.derive(100 + k);
        test_y.push_back(sample_labels(cfg.test_rhos[k], cfg.n_test, test_rng));
        test_x.push_back(gen_features(test_y.back(), cfg.separation, test_rng));
    }

    SuiteResult result;
    result.test_rhos = cfg.test_rhos;
    std::uint64_t model_seed = master.derive(1000).next_u64();
    result.runs.push_back(train_synth_model(SynthModel::baseline, 0.0, cfg, train_x, train_y,
                                            test_x, test_y, model_seed));
    result.runs.push_back(train_synth_model(SynthModel::baseline_hidden, 0.0, cfg, train_x,
                                            train_y, test_x, test_y, model_seed));
    result.runs.push_back(train_synth_model(SynthModel::sharing, 0.0, cfg, train_x, train_y,
                                            test_x, test_y, model_seed));
    for (double l : lambda_list)
        result.runs.push_back(train_synth_model(SynthModel::adversary, l, cfg, train_x, train_y,
                                                test_x, test_y, model_seed));
    return result;
}

} // namespace gal
