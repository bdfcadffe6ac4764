#pragma once
// Shared fixtures and independent oracles for the test suite. Oracles here
// are written as directly as possible (plain loops, textbook formulas) so
// they cannot share a bug with the library implementations they check.
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gal/data.hpp"
#include "gal/gal_model.hpp"
#include "gal/grouping.hpp"
#include "gal/matrix.hpp"
#include "gal/net.hpp"
#include "gal/rng.hpp"

namespace testutil {

// Unique scratch directory, removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned long long> counter{0};
        auto id = counter.fetch_add(1);
        path = std::filesystem::temp_directory_path() /
               ("gal_test_" + std::to_string(::getpid()) + "_" + std::to_string(id));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str(const std::string& name = "") const {
        return name.empty() ? path.string() : (path / name).string();
    }
};

// Triple-loop reference matrix product.
inline gal::Matrix naive_matmul(const gal::Matrix& a, const gal::Matrix& b) {
    gal::Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k)
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    return c;
}

// Textbook Pearson correlation over doubles; 0 for a constant side.
inline double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

// Pairwise correlation oracle over explicit sample rows (n x D): materializes
// each attribute as a plain double vector and correlates columns.
inline gal::Matrix corr_matrix_oracle(const std::vector<std::vector<std::uint8_t>>& rows) {
    std::size_t d = rows.empty() ? 0 : rows[0].size();
    std::vector<std::vector<double>> cols(d, std::vector<double>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t a = 0; a < d; ++a) cols[a][i] = rows[i][a];
    gal::Matrix out(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) out(a, b) = pearson_oracle(cols[a], cols[b]);
    return out;
}

// Instance-level rows for the seen-side correlation: one binarized class row
// per train instance.
inline std::vector<std::vector<std::uint8_t>> seen_instance_rows(const gal::AttributeMatrix& attrs,
                                                                 const std::vector<int>& labels,
                                                                 const std::vector<int>& train_classes) {
    std::vector<std::vector<std::uint8_t>> rows;
    for (int lab : labels) {
        bool in_train = false;
        for (int c : train_classes)
            if (c == lab) in_train = true;
        if (!in_train) continue;
        std::vector<std::uint8_t> r(attrs.num_attributes);
        for (std::size_t a = 0; a < attrs.num_attributes; ++a)
            r[a] = attrs.bin(static_cast<std::size_t>(lab), a);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<std::vector<std::uint8_t>> class_rows(const gal::AttributeMatrix& attrs,
                                                         const std::vector<int>& class_set) {
    std::vector<std::vector<std::uint8_t>> rows;
    for (int c : class_set) {
        std::vector<std::uint8_t> r(attrs.num_attributes);
        for (std::size_t a = 0; a < attrs.num_attributes; ++a)
            r[a] = attrs.bin(static_cast<std::size_t>(c), a);
        rows.push_back(std::move(r));
    }
    return rows;
}

// Random class-attribute matrix whose binarized view has no constant column.
inline gal::Matrix random_attribute_values(std::size_t classes, std::size_t attrs, gal::Rng& rng) {
    gal::Matrix values(classes, attrs);
    for (std::size_t a = 0; a < attrs; ++a) {
        while (true) {
            for (std::size_t c = 0; c < classes; ++c) values(c, a) = rng.uniform();
            double mean = 0;
            for (std::size_t c = 0; c < classes; ++c) mean += values(c, a);
            mean /= static_cast<double>(classes);
            std::size_t ones = 0;
            for (std::size_t c = 0; c < classes; ++c) ones += values(c, a) > mean ? 1u : 0u;
            if (ones > 0 && ones < classes) break;
        }
    }
    return values;
}

// Symmetric shift matrix with a planted block structure: low shift inside
// blocks, high shift across, plus a little noise so ties never occur.
inline gal::Matrix planted_delta(const std::vector<int>& block_of, double lo, double hi,
                                 gal::Rng& rng) {
    std::size_t d = block_of.size();
    gal::Matrix delta(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            double base = block_of[i] == block_of[j] ? lo : hi;
            double v = base + rng.uniform(0.0, 0.02);
            delta(i, j) = v;
            delta(j, i) = v;
        }
    return delta;
}

// Tiny fully separable zero-shot task: features are noisy copies of the class
// attribute row, unseen classes are unions of seen attributes.
inline gal::Dataset separable_dataset(std::uint64_t seed, std::size_t per_class = 30,
                                      double noise = 0.05) {
    gal::Matrix phi(5, 3);
    double codes[5][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}};
    for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t a = 0; a < 3; ++a) phi(c, a) = codes[c][a];

    gal::Dataset ds;
    ds.features = gal::Matrix(5 * per_class, 3);
    gal::Rng rng(seed);
    std::size_t row = 0;
    for (int c = 0; c < 5; ++c)
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            for (std::size_t a = 0; a < 3; ++a)
                ds.features(row, a) = phi(static_cast<std::size_t>(c), a) + noise * rng.normal();
            ds.labels.push_back(c);
        }
    ds.attributes = gal::make_attribute_matrix(phi);
    ds.split.train_classes = {0, 1, 2};
    ds.split.val_classes = {};
    ds.split.test_classes = {3, 4};
    ds.validate();
    return ds;
}

// Correlation-shift laboratory dataset: two attributes that co-occur in
// training classes (pattern 00/11) but decouple in the held-out classes
// (01/10), each attribute driving a 3-dim feature block at its own noise
// level. A model that leans on the co-occurrence transfers poorly.
inline gal::Dataset shifted_dataset(std::uint64_t feature_seed) {
    constexpr int kClasses = 11;
    constexpr int kAttrs = 2;
    constexpr int kBlock = 3;
    static const double kPattern[kClasses][kAttrs] = {
        {0, 0}, {0, 0}, {1, 1}, {1, 1}, {1, 1},  // train
        {0, 1}, {1, 0}, {0, 0},                  // val
        {0, 1}, {1, 0}, {1, 1},                  // test
    };
    static const double kJitter[kClasses] = {0.10, -0.08, 0.06, -0.11, 0.02, 0.09,
                                             -0.05, 0.04, -0.09, 0.07, 0.12};
    static const double kSigma[kAttrs] = {1.4, 0.6};

    gal::Matrix phi(kClasses, kAttrs);
    for (int c = 0; c < kClasses; ++c)
        for (int a = 0; a < kAttrs; ++a)
            phi(static_cast<std::size_t>(c), static_cast<std::size_t>(a)) =
                kPattern[c][a] + 0.5 * kJitter[(c + 3 * a) % kClasses];

    auto count_for = [](int c) { return c < 5 ? 60 : (c < 8 ? 120 : 200); };
    std::size_t total = 0;
    for (int c = 0; c < kClasses; ++c) total += static_cast<std::size_t>(count_for(c));

    gal::Dataset ds;
    ds.features = gal::Matrix(total, kAttrs * kBlock);
    ds.labels.reserve(total);
    gal::Rng rng(feature_seed);
    std::size_t row = 0;
    for (int c = 0; c < kClasses; ++c)
        for (int i = 0; i < count_for(c); ++i, ++row) {
            for (int a = 0; a < kAttrs; ++a)
                for (int k = 0; k < kBlock; ++k)
                    ds.features(row, static_cast<std::size_t>(a * kBlock + k)) =
                        phi(static_cast<std::size_t>(c), static_cast<std::size_t>(a)) +
                        kSigma[a] * rng.normal();
            ds.labels.push_back(c);
        }
    ds.attributes = gal::make_attribute_matrix(phi);
    ds.split.train_classes = {0, 1, 2, 3, 4};
    ds.split.val_classes = {5, 6, 7};
    ds.split.test_classes = {8, 9, 10};
    ds.validate();
    return ds;
}

inline gal::Grouping two_groups_of_one() {
    gal::Grouping g;
    g.assignment = {0, 1};
    g.L = 2;
    return g;
}

// Random synthetic dataset in the style of the toy-data generator: random
// binary codes, a random linear map to feature space, Gaussian noise.
inline gal::Dataset random_dataset(std::size_t classes, std::size_t attrs, std::size_t dim,
                                   std::size_t per_class, double noise, std::uint64_t seed) {
    gal::Rng rng(seed);
    gal::Matrix phi(classes, attrs);
    for (std::size_t a = 0; a < attrs; ++a) {
        while (true) {
            for (std::size_t c = 0; c < classes; ++c) phi(c, a) = rng.uniform() < 0.5 ? 0.0 : 1.0;
            double s = 0;
            for (std::size_t c = 0; c < classes; ++c) s += phi(c, a);
            if (s > 0 && s < static_cast<double>(classes)) break;
        }
    }
    gal::Matrix link(attrs, dim);
    for (std::size_t i = 0; i < link.size(); ++i) link.raw()[i] = rng.normal();

    gal::Dataset ds;
    ds.features = gal::Matrix(classes * per_class, dim);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            for (std::size_t d = 0; d < dim; ++d) {
                double v = 0;
                for (std::size_t a = 0; a < attrs; ++a) v += phi(c, a) * link(a, d);
                ds.features(row, d) = v + noise * rng.normal();
            }
            ds.labels.push_back(static_cast<int>(c));
        }
    ds.attributes = gal::make_attribute_matrix(phi);
    std::size_t quarter = std::max<std::size_t>(1, classes / 4);
    for (std::size_t c = 0; c < classes; ++c) {
        if (c < classes - 2 * quarter)
            ds.split.train_classes.push_back(static_cast<int>(c));
        else if (c < classes - quarter)
            ds.split.val_classes.push_back(static_cast<int>(c));
        else
            ds.split.test_classes.push_back(static_cast<int>(c));
    }
    ds.validate();
    return ds;
}

// ---- finite-difference checking of the grouped network's hand-derived
// gradients. Gradients are captured by exploiting fresh velocity buffers:
// after one step from zero velocity, v = mu*0 + g = g exactly; parameters are
// snapshotted before the step and restored afterwards so the central
// differences are evaluated at the same point the gradients were computed.

struct LayerSnapshot {
    gal::Matrix W;
    std::vector<double> b;
};

inline LayerSnapshot snap(const gal::DenseLayer& l) { return {l.W, l.b}; }
inline void restore(gal::DenseLayer& l, const LayerSnapshot& s) {
    l.W = s.W;
    l.b = s.b;
}

// One arm's weighted loss lambda * delta_ij * (mean balanced BCE over the
// target group's attributes), the quantity the arm itself descends.
inline double gal_arm_objective(gal::GalNetwork& net, const gal::ForwardResult& fr,
                                const gal::Batch& batch, const gal::AttributeMatrix& attrs,
                                std::size_t arm_index) {
    const auto& arm = net.arms()[arm_index];
    auto groups = net.grouping().groups();
    const auto& ga = groups[static_cast<std::size_t>(arm.j)];
    std::size_t n = batch.labels.size();
    std::size_t D = attrs.num_attributes;
    double weight = net.config().lambda *
                    net.delta_ij()(static_cast<std::size_t>(arm.i), static_cast<std::size_t>(arm.j));
    double loss = 0.0;
    std::vector<double> col(n);
    std::vector<std::uint8_t> tgt(n);
    for (std::size_t k = 0; k < ga.size(); ++k) {
        auto attr = static_cast<std::size_t>(ga[k]);
        for (std::size_t r = 0; r < n; ++r) {
            col[r] = fr.adv_probs[arm_index](r, k);
            tgt[r] = batch.attr_targets[r * D + attr];
        }
        loss += gal::loss_balanced_bce(col, tgt).loss;
    }
    return weight * loss / static_cast<double>(ga.size());
}

// Encoder-side objective: mean class loss minus the weighted adversarial
// losses (the sign the reversal imposes on everything before the arms).
inline double gal_forward_objective(gal::GalNetwork& net, const gal::Batch& batch,
                                    const gal::AttributeMatrix& attrs,
                                    const std::vector<int>& train_classes, bool include_adv) {
    gal::Rng unused(0);  // dropout must be 0, so no draws are consumed
    gal::ForwardResult fr = net.forward(batch.features, unused, true);
    gal::Matrix phi = gal::phi_rows(attrs, train_classes);
    gal::Matrix class_sc = gal::matmul_nt(fr.attr_scores, phi);

    double z = 0.0;
    std::vector<double> row(train_classes.size());
    for (std::size_t k = 0; k < batch.labels.size(); ++k) {
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = class_sc(k, c);
        std::size_t y = 0;
        while (train_classes[y] != batch.labels[k]) ++y;
        z += gal::zsl_loss(net.config().loss, row, y, net.config().margin).loss;
    }
    z /= static_cast<double>(batch.labels.size());
    if (!include_adv) return z;

    for (std::size_t a = 0; a < net.arms().size(); ++a)
        z -= gal_arm_objective(net, fr, batch, attrs, a);
    return z;
}

// Worst relative error between analytic gradients and central differences
// over every parameter of every layer. Requires dropout 0 and l2 0 in cfg.
inline double gal_fd_worst(const gal::GalConfig& cfg, const gal::Grouping& grouping,
                           const gal::Matrix& delta, const gal::Batch& batch,
                           const gal::AttributeMatrix& attrs, const std::vector<int>& train_classes,
                           double eps = 1e-5) {
    gal::GalNetwork net(cfg, grouping, delta);

    std::vector<LayerSnapshot> snaps;
    auto snap_all = [&](auto& layers) {
        for (auto& l : layers) snaps.push_back(snap(l));
    };
    snap_all(net.trunks());
    snap_all(net.extractors());
    snap_all(net.primaries());
    for (auto& a : net.arms()) snaps.push_back(snap(a.layer));

    gal::Rng step_rng(1);
    (void)net.training_step(batch, attrs, train_classes, step_rng);

    std::size_t si = 0;
    auto restore_all = [&](auto& layers) {
        for (auto& l : layers) restore(l, snaps[si++]);
    };
    restore_all(net.trunks());
    restore_all(net.extractors());
    restore_all(net.primaries());
    for (auto& a : net.arms()) restore(a.layer, snaps[si++]);

    double worst = 0.0;
    auto check_block = [&](gal::DenseLayer& l, const std::function<double()>& objective) {
        worst = std::max(worst, gal::finite_diff_check(objective, l.W.data(), l.vW.data(),
                                                       l.W.size(), eps));
        worst = std::max(worst, gal::finite_diff_check(objective, l.b.data(), l.vb.data(),
                                                       l.b.size(), eps));
    };
    auto encoder_objective = [&]() {
        return gal_forward_objective(net, batch, attrs, train_classes, true);
    };
    for (auto& l : net.trunks()) check_block(l, encoder_objective);
    for (auto& l : net.extractors()) check_block(l, encoder_objective);
    for (auto& l : net.primaries()) check_block(l, encoder_objective);
    for (std::size_t a = 0; a < net.arms().size(); ++a) {
        auto arm_objective = [&, a]() {
            gal::Rng unused(0);
            gal::ForwardResult fr = net.forward(batch.features, unused, true);
            return gal_arm_objective(net, fr, batch, attrs, a);
        };
        check_block(net.arms()[a].layer, arm_objective);
    }
    return worst;
}

// Random training batch over the dataset's train split.
inline gal::Batch random_train_batch(const gal::Dataset& ds, std::size_t n, gal::Rng& rng) {
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        for (int c : ds.split.train_classes)
            if (ds.labels[i] == c) train_rows.push_back(i);
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = train_rows[rng.index(train_rows.size())];
    return gal::make_batch(ds.features, ds.labels, ds.attributes, idx);
}

} // namespace testutil
