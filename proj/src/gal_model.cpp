#include "gal/gal_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gal/errors.hpp"

namespace gal {

TrunkMode trunk_mode_from_string(const std::string& s) {
    if (s == "shared") return TrunkMode::shared;
    if (s == "per-group" || s == "per_group") return TrunkMode::per_group;
    throw InputError("unknown trunk mode '" + s + "' (expected shared|per-group)");
}

WeightingMode weighting_mode_from_string(const std::string& s) {
    if (s == "delta-corr" || s == "delta_corr") return WeightingMode::delta_corr;
    if (s == "equal") return WeightingMode::equal;
    throw InputError("unknown weighting mode '" + s + "' (expected delta-corr|equal)");
}

std::string to_string(TrunkMode m) { return m == TrunkMode::shared ? "shared" : "per-group"; }
std::string to_string(WeightingMode m) {
    return m == WeightingMode::delta_corr ? "delta-corr" : "equal";
}

void GalConfig::validate() const {
    if (input_dim < 1) throw InputError("config: input_dim must be >= 1");
    if (trunk_width < 1 || group_width < 1) throw InputError("config: layer widths must be >= 1");
    if (lambda < 0.0) throw InputError("config: lambda must be >= 0");
    if (margin <= 0.0 && loss != LossKind::softmax) throw InputError("config: margin must be > 0");
    if (dropout_p < 0.0 || dropout_p > 0.9) throw InputError("config: dropout must be in [0, 0.9]");
    if (l2 < 0.0) throw InputError("config: l2 must be >= 0");
    if (batch_size < 1) throw InputError("config: batch_size must be >= 1");
    if (epochs < 1) throw InputError("config: epochs must be >= 1");
    optimizer.validate();
}

std::string GalConfig::echo() const {
    std::ostringstream os;
    os << "input_dim=" << input_dim << "\n"
       << "trunk_width=" << trunk_width << "\n"
       << "group_width=" << group_width << "\n"
       << "trunk_mode=" << to_string(trunk_mode) << "\n"
       << "loss=" << to_string(loss) << "\n"
       << "lambda=" << lambda << "\n"
       << "margin=" << margin << "\n"
       << "dropout=" << dropout_p << "\n"
       << "l2=" << l2 << "\n"
       << "weighting=" << to_string(weighting) << "\n"
       << "learning_rate=" << optimizer.learning_rate << "\n"
       << "momentum=" << optimizer.momentum << "\n"
       << "nesterov=" << (optimizer.nesterov ? 1 : 0) << "\n"
       << "batch_size=" << batch_size << "\n"
       << "epochs=" << epochs << "\n"
       << "seed=" << seed << "\n";
    return os.str();
}

Batch make_batch(const Matrix& features, const std::vector<int>& labels,
                 const AttributeMatrix& attrs, const std::vector<std::size_t>& idx) {
    Batch b;
    b.features = Matrix(idx.size(), features.cols());
    b.labels.resize(idx.size());
    b.attr_targets.resize(idx.size() * attrs.num_attributes);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        std::size_t i = idx[k];
        std::memcpy(b.features.row(k), features.row(i), sizeof(double) * features.cols());
        b.labels[k] = labels[i];
        auto c = static_cast<std::size_t>(labels[i]);
        std::memcpy(&b.attr_targets[k * attrs.num_attributes], &attrs.binarized[c * attrs.num_attributes],
                    attrs.num_attributes);
    }
    return b;
}

Matrix phi_rows(const AttributeMatrix& attrs, const std::vector<int>& class_set) {
    Matrix m(class_set.size(), attrs.num_attributes);
    for (std::size_t k = 0; k < class_set.size(); ++k) {
        int c = class_set[k];
        if (c < 0 || static_cast<std::size_t>(c) >= attrs.num_classes)
            throw InputError("phi_rows: class " + std::to_string(c) + " out of range");
        std::memcpy(m.row(k), attrs.values.row(static_cast<std::size_t>(c)),
                    sizeof(double) * attrs.num_attributes);
    }
    return m;
}

LossResult zsl_loss(LossKind kind, const std::vector<double>& scores, std::size_t y, double margin) {
    switch (kind) {
        case LossKind::ale: return loss_ale(scores, y, margin);
        case LossKind::devise: return loss_devise(scores, y, margin);
        case LossKind::sje: return loss_sje(scores, y, margin);
        case LossKind::softmax: return loss_softmax_ce(scores, y);
    }
    throw StateError("zsl_loss: unreachable loss kind");
}

std::vector<int> argmax_classes(const Matrix& class_score_rows, const std::vector<int>& class_set) {
    if (class_set.empty()) throw InputError("argmax_classes: empty class set");
    if (class_score_rows.cols() != class_set.size())
        throw DimensionError("argmax_classes: score columns != class set size");
    std::vector<int> out(class_score_rows.rows());
    for (std::size_t i = 0; i < class_score_rows.rows(); ++i) {
        const double* r = class_score_rows.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < class_set.size(); ++c)
            if (r[c] > r[best]) best = c;  // strict: lowest index wins ties
        out[i] = class_set[best];
    }
    return out;
}

GalNetwork::GalNetwork(const GalConfig& cfg, Grouping grouping, const Matrix& delta_ij)
    : cfg_(cfg), grouping_(std::move(grouping)) {
    cfg_.validate();
    grouping_.validate();
    auto L = static_cast<std::size_t>(grouping_.L);
    if (delta_ij.rows() != L || delta_ij.cols() != L)
        throw DimensionError("gal build: delta_ij must be L x L");

    delta_ij_ = delta_ij;
    if (cfg_.weighting == WeightingMode::equal) {
        for (std::size_t i = 0; i < L; ++i)
            for (std::size_t j = 0; j < L; ++j) delta_ij_(i, j) = i == j ? 0.0 : 1.0;
    }
    group_attrs_ = grouping_.groups();

    Rng rng(cfg_.seed);
    std::size_t n_trunks = cfg_.trunk_mode == TrunkMode::shared ? 1 : L;
    for (std::size_t t = 0; t < n_trunks; ++t)
        trunks_.emplace_back(cfg_.input_dim, cfg_.trunk_width, rng);
    for (std::size_t i = 0; i < L; ++i)
        extractors_.emplace_back(cfg_.trunk_width, cfg_.group_width, rng);
    for (std::size_t i = 0; i < L; ++i)
        primaries_.emplace_back(cfg_.group_width, group_attrs_[i].size(), rng);
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < L; ++j) {
            if (i == j || delta_ij_(i, j) <= 0.0) continue;
            Arm arm;
            arm.i = static_cast<int>(i);
            arm.j = static_cast<int>(j);
            arm.layer = DenseLayer(cfg_.group_width, group_attrs_[j].size(), rng);
            arms_.push_back(std::move(arm));
        }
    }
    for (std::size_t t = 0; t < n_trunks; ++t) trunk_drop_.emplace_back(cfg_.dropout_p);
    for (std::size_t i = 0; i < L; ++i) extr_drop_.emplace_back(cfg_.dropout_p);
}

ForwardResult GalNetwork::forward(const Matrix& x, Rng& rng, bool train) {
    if (x.cols() != cfg_.input_dim)
        throw DimensionError("gal forward: input dim " + std::to_string(x.cols()) + " != " +
                             std::to_string(cfg_.input_dim));
    auto L = static_cast<std::size_t>(grouping_.L);
    std::vector<Matrix> trunk_out(trunks_.size());
    for (std::size_t t = 0; t < trunks_.size(); ++t)
        trunk_out[t] = trunk_drop_[t].forward(trunks_[t].forward(x), rng, train);

    ForwardResult fr;
    fr.attr_scores = Matrix(x.rows(), grouping_.assignment.size());
    std::vector<Matrix> latents(L);
    for (std::size_t i = 0; i < L; ++i) {
        const Matrix& t = trunk_out[cfg_.trunk_mode == TrunkMode::shared ? 0 : i];
        latents[i] = extr_drop_[i].forward(extractors_[i].forward(t), rng, train);
        Matrix p = primaries_[i].forward(latents[i]);
        const auto& attrs = group_attrs_[i];
        for (std::size_t r = 0; r < p.rows(); ++r)
            for (std::size_t k = 0; k < attrs.size(); ++k)
                fr.attr_scores(r, static_cast<std::size_t>(attrs[k])) = p(r, k);
    }
    fr.adv_probs.reserve(arms_.size());
    for (auto& arm : arms_)
        fr.adv_probs.push_back(sigmoid(arm.layer.forward(latents[static_cast<std::size_t>(arm.i)])));
    return fr;
}

StepMetrics GalNetwork::training_step(const Batch& batch, const AttributeMatrix& attrs,
                                      const std::vector<int>& train_classes, Rng& rng) {
    std::size_t n = batch.labels.size();
    std::size_t D = attrs.num_attributes;
    auto L = static_cast<std::size_t>(grouping_.L);

    std::vector<int> label_idx(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto it = std::find(train_classes.begin(), train_classes.end(), batch.labels[k]);
        if (it == train_classes.end())
            throw InputError("training_step: label " + std::to_string(batch.labels[k]) +
                             " not in train class set");
        label_idx[k] = static_cast<int>(it - train_classes.begin());
    }

    ForwardResult fr = forward(batch.features, rng, true);
    Matrix phi_train = phi_rows(attrs, train_classes);
    Matrix class_sc = matmul_nt(fr.attr_scores, phi_train);  // n x |train_classes|

    StepMetrics metrics;
    Matrix d_class(n, train_classes.size());
    std::vector<double> row(train_classes.size());
    for (std::size_t k = 0; k < n; ++k) {
        std::memcpy(row.data(), class_sc.row(k), sizeof(double) * row.size());
        LossResult lr = zsl_loss(cfg_.loss, row, static_cast<std::size_t>(label_idx[k]), cfg_.margin);
        metrics.zsl_loss += lr.loss;
        double* dst = d_class.row(k);
        for (std::size_t c = 0; c < row.size(); ++c) dst[c] = lr.grad[c] / static_cast<double>(n);
    }
    metrics.zsl_loss /= static_cast<double>(n);
    if (!std::isfinite(metrics.zsl_loss))
        throw NumericError("training_step: non-finite class loss");

    Matrix d_scores = matmul(d_class, phi_train);  // n x D

    // primary arms
    std::vector<Matrix> d_latent(L);
    std::vector<Matrix> dW_primary(L);
    std::vector<std::vector<double>> db_primary(L);
    for (std::size_t i = 0; i < L; ++i) {
        const auto& ga = group_attrs_[i];
        Matrix d_p(n, ga.size());
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = 0; k < ga.size(); ++k)
                d_p(r, k) = d_scores(r, static_cast<std::size_t>(ga[k]));
        d_latent[i] = primaries_[i].backward(d_p, dW_primary[i], db_primary[i]);
    }

    // adversarial arms: the arm itself descends lambda * delta_ij * mean-BCE;
    // the latent receives that gradient reversed.
    std::vector<Matrix> dW_arm(arms_.size());
    std::vector<std::vector<double>> db_arm(arms_.size());
    GradReverse reverse{1.0};
    for (std::size_t a = 0; a < arms_.size(); ++a) {
        const Arm& arm = arms_[a];
        const auto& ga = group_attrs_[static_cast<std::size_t>(arm.j)];
        const Matrix& probs = fr.adv_probs[a];
        double weight = cfg_.lambda * delta_ij_(static_cast<std::size_t>(arm.i),
                                                static_cast<std::size_t>(arm.j));
        Matrix d_prob(n, ga.size());
        double arm_loss = 0.0;
        std::vector<double> col(n);
        std::vector<std::uint8_t> tgt(n);
        for (std::size_t k = 0; k < ga.size(); ++k) {
            auto attr = static_cast<std::size_t>(ga[k]);
            for (std::size_t r = 0; r < n; ++r) {
                col[r] = probs(r, k);
                tgt[r] = batch.attr_targets[r * D + attr];
            }
            LossResult lr = loss_balanced_bce(col, tgt);
            arm_loss += lr.loss;
            double scale = weight / static_cast<double>(ga.size());
            for (std::size_t r = 0; r < n; ++r) d_prob(r, k) = scale * lr.grad[r];
        }
        arm_loss /= static_cast<double>(ga.size());
        metrics.adv_losses.push_back(arm_loss);
        if (!std::isfinite(arm_loss))
            throw NumericError("training_step: non-finite adversarial loss");

        Matrix d_z = sigmoid_backward(probs, d_prob);
        Matrix d_h = arms_[a].layer.backward(d_z, dW_arm[a], db_arm[a]);
        d_latent[static_cast<std::size_t>(arm.i)] += reverse.backward(d_h);
    }

    // extractors and trunk(s)
    std::vector<Matrix> d_trunk_out(trunks_.size());
    std::vector<Matrix> dW_extr(L);
    std::vector<std::vector<double>> db_extr(L);
    for (std::size_t i = 0; i < L; ++i) {
        Matrix d_e = extr_drop_[i].backward(d_latent[i]);
        Matrix d_t = extractors_[i].backward(d_e, dW_extr[i], db_extr[i]);
        std::size_t t = cfg_.trunk_mode == TrunkMode::shared ? 0 : i;
        if (d_trunk_out[t].empty())
            d_trunk_out[t] = std::move(d_t);
        else
            d_trunk_out[t] += d_t;
    }
    std::vector<Matrix> dW_trunk(trunks_.size());
    std::vector<std::vector<double>> db_trunk(trunks_.size());
    for (std::size_t t = 0; t < trunks_.size(); ++t) {
        Matrix d_in = trunk_drop_[t].backward(d_trunk_out[t]);
        trunks_[t].backward(d_in, dW_trunk[t], db_trunk[t]);
    }

    // updates: L2 on final (primary + adversarial) layers only
    OptimizerConfig internal = cfg_.optimizer;
    internal.weight_decay = 0.0;
    OptimizerConfig final_arm = cfg_.optimizer;
    final_arm.weight_decay = cfg_.l2;

    double gn = 0.0;
    auto accumulate_norm = [&gn](const Matrix& dW, const std::vector<double>& db) {
        for (double v : dW.raw()) gn += v * v;
        for (double v : db) gn += v * v;
    };
    for (std::size_t t = 0; t < trunks_.size(); ++t) {
        accumulate_norm(dW_trunk[t], db_trunk[t]);
        sgd_nesterov_step(trunks_[t], dW_trunk[t], db_trunk[t], internal);
    }
    for (std::size_t i = 0; i < L; ++i) {
        accumulate_norm(dW_extr[i], db_extr[i]);
        sgd_nesterov_step(extractors_[i], dW_extr[i], db_extr[i], internal);
    }
    for (std::size_t i = 0; i < L; ++i) {
        accumulate_norm(dW_primary[i], db_primary[i]);
        sgd_nesterov_step(primaries_[i], dW_primary[i], db_primary[i], final_arm);
    }
    for (std::size_t a = 0; a < arms_.size(); ++a) {
        accumulate_norm(dW_arm[a], db_arm[a]);
        sgd_nesterov_step(arms_[a].layer, dW_arm[a], db_arm[a], final_arm);
    }
    metrics.grad_norm = std::sqrt(gn);
    return metrics;
}

std::vector<int> GalNetwork::predict_classes(const Matrix& x, const AttributeMatrix& attrs,
                                             const std::vector<int>& class_set) {
    Rng unused(0);
    ForwardResult fr = forward(x, unused, false);
    Matrix sc = matmul_nt(fr.attr_scores, phi_rows(attrs, class_set));
    return argmax_classes(sc, class_set);
}

namespace {

constexpr char kModelMagic[4] = {'G', 'A', 'L', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void write_f64(std::ofstream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw FormatError(path + ": truncated checkpoint");
    return v;
}
std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw FormatError(path + ": truncated checkpoint");
    return v;
}
double read_f64(std::ifstream& in, const std::string& path) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw FormatError(path + ": truncated checkpoint");
    return v;
}

void write_layer(std::ofstream& out, const DenseLayer& l) {
    write_u64(out, l.W.rows());
    write_u64(out, l.W.cols());
    for (double v : l.W.raw()) write_f64(out, v);
    for (double v : l.b) write_f64(out, v);
}

DenseLayer read_layer(std::ifstream& in, const std::string& path) {
    std::uint64_t r = read_u64(in, path), c = read_u64(in, path);
    DenseLayer l;
    l.W = Matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    for (auto& v : l.W.raw()) v = read_f64(in, path);
    l.b.resize(static_cast<std::size_t>(c));
    for (auto& v : l.b) v = read_f64(in, path);
    l.vW = Matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    l.vb.assign(static_cast<std::size_t>(c), 0.0);
    return l;
}

} // namespace

void GalNetwork::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write checkpoint: " + path);
    out.write(kModelMagic, 4);
    write_u32(out, kModelVersion);
    // config echo
    write_u64(out, cfg_.input_dim);
    write_u64(out, cfg_.trunk_width);
    write_u64(out, cfg_.group_width);
    write_u32(out, cfg_.trunk_mode == TrunkMode::shared ? 0 : 1);
    write_u32(out, static_cast<std::uint32_t>(cfg_.loss));
    write_f64(out, cfg_.lambda);
    write_f64(out, cfg_.margin);
    write_f64(out, cfg_.dropout_p);
    write_f64(out, cfg_.l2);
    write_u32(out, cfg_.weighting == WeightingMode::delta_corr ? 0 : 1);
    write_f64(out, cfg_.optimizer.learning_rate);
    write_f64(out, cfg_.optimizer.momentum);
    write_f64(out, cfg_.optimizer.weight_decay);
    write_u32(out, cfg_.optimizer.nesterov ? 1 : 0);
    write_u64(out, cfg_.batch_size);
    write_u64(out, cfg_.epochs);
    write_u64(out, cfg_.seed);
    // grouping
    write_u64(out, grouping_.assignment.size());
    write_u32(out, static_cast<std::uint32_t>(grouping_.L));
    for (int g : grouping_.assignment) write_u32(out, static_cast<std::uint32_t>(g));
    // effective delta weights
    for (double v : delta_ij_.raw()) write_f64(out, v);
    // layers
    write_u32(out, static_cast<std::uint32_t>(trunks_.size()));
    for (const auto& l : trunks_) write_layer(out, l);
    for (const auto& l : extractors_) write_layer(out, l);
    for (const auto& l : primaries_) write_layer(out, l);
    write_u32(out, static_cast<std::uint32_t>(arms_.size()));
    for (const auto& a : arms_) {
        write_u32(out, static_cast<std::uint32_t>(a.i));
        write_u32(out, static_cast<std::uint32_t>(a.j));
        write_layer(out, a.layer);
    }
    if (!out) throw InputError("failed writing checkpoint: " + path);
}

GalNetwork GalNetwork::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
        throw FormatError(path + ": bad magic (expected GALM)");
    std::uint32_t version = read_u32(in, path);
    if (version != kModelVersion)
        throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));

    GalConfig cfg;
    cfg.input_dim = static_cast<std::size_t>(read_u64(in, path));
    cfg.trunk_width = static_cast<std::size_t>(read_u64(in, path));
    cfg.group_width = static_cast<std::size_t>(read_u64(in, path));
    cfg.trunk_mode = read_u32(in, path) == 0 ? TrunkMode::shared : TrunkMode::per_group;
    cfg.loss = static_cast<LossKind>(read_u32(in, path));
    cfg.lambda = read_f64(in, path);
    cfg.margin = read_f64(in, path);
    cfg.dropout_p = read_f64(in, path);
    cfg.l2 = read_f64(in, path);
    cfg.weighting = read_u32(in, path) == 0 ? WeightingMode::delta_corr : WeightingMode::equal;
    cfg.optimizer.learning_rate = read_f64(in, path);
    cfg.optimizer.momentum = read_f64(in, path);
    cfg.optimizer.weight_decay = read_f64(in, path);
    cfg.optimizer.nesterov = read_u32(in, path) != 0;
    cfg.batch_size = static_cast<std::size_t>(read_u64(in, path));
    cfg.epochs = static_cast<std::size_t>(read_u64(in, path));
    cfg.seed = read_u64(in, path);

    Grouping grouping;
    std::uint64_t D = read_u64(in, path);
    grouping.L = static_cast<int>(read_u32(in, path));
    grouping.assignment.resize(static_cast<std::size_t>(D));
    for (auto& g : grouping.assignment) g = static_cast<int>(read_u32(in, path));

    if (grouping.L < 1 || D == 0) throw FormatError(path + ": invalid grouping in checkpoint");
    auto L = static_cast<std::size_t>(grouping.L);
    Matrix delta(L, L);
    for (auto& v : delta.raw()) v = read_f64(in, path);

    std::optional<GalNetwork> built;
    try {
        built.emplace(cfg, grouping, delta);
    } catch (const Error& e) {
        throw FormatError(path + ": invalid checkpoint contents (" + std::string(e.what()) + ")");
    }
    GalNetwork& net = *built;
    std::uint32_t n_trunks = read_u32(in, path);
    if (n_trunks != net.trunks_.size()) throw FormatError(path + ": trunk count mismatch");
    for (auto& l : net.trunks_) l = read_layer(in, path);
    for (auto& l : net.extractors_) l = read_layer(in, path);
    for (auto& l : net.primaries_) l = read_layer(in, path);
    std::uint32_t n_arms = read_u32(in, path);
    if (n_arms != net.arms_.size()) throw FormatError(path + ": adversarial arm count mismatch");
    for (auto& a : net.arms_) {
        a.i = static_cast<int>(read_u32(in, path));
        a.j = static_cast<int>(read_u32(in, path));
        a.layer = read_layer(in, path);
    }
    in.peek();
    if (!in.eof()) throw FormatError(path + ": trailing bytes after checkpoint data");
    return std::move(net);
}

PlainZslModel::PlainZslModel(const GalConfig& cfg, std::size_t num_attributes) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    trunk = DenseLayer(cfg_.input_dim, cfg_.trunk_width, rng);
    extractor = DenseLayer(cfg_.trunk_width, cfg_.group_width, rng);
    head = DenseLayer(cfg_.group_width, num_attributes, rng);
    trunk_drop_ = Dropout(cfg_.dropout_p);
    extr_drop_ = Dropout(cfg_.dropout_p);
}

Matrix PlainZslModel::forward(const Matrix& x, Rng& rng, bool train) {
    Matrix t = trunk_drop_.forward(trunk.forward(x), rng, train);
    Matrix h = extr_drop_.forward(extractor.forward(t), rng, train);
    return head.forward(h);
}

double PlainZslModel::training_step(const Batch& batch, const AttributeMatrix& attrs,
                                    const std::vector<int>& train_classes, Rng& rng) {
    std::size_t n = batch.labels.size();
    Matrix scores = forward(batch.features, rng, true);
    Matrix phi_train = phi_rows(attrs, train_classes);
    Matrix class_sc = matmul_nt(scores, phi_train);

    double total = 0.0;
    Matrix d_class(n, train_classes.size());
    std::vector<double> row(train_classes.size());
    for (std::size_t k = 0; k < n; ++k) {
        auto it = std::find(train_classes.begin(), train_classes.end(), batch.labels[k]);
        if (it == train_classes.end())
            throw InputError("training_step: label not in train class set");
        std::memcpy(row.data(), class_sc.row(k), sizeof(double) * row.size());
        LossResult lr = zsl_loss(cfg_.loss, row, static_cast<std::size_t>(it - train_classes.begin()),
                                 cfg_.margin);
        total += lr.loss;
        for (std::size_t c = 0; c < row.size(); ++c)
            d_class(k, c) = lr.grad[c] / static_cast<double>(n);
    }
    total /= static_cast<double>(n);

    Matrix d_scores = matmul(d_class, phi_train);
    Matrix dW_h, dW_e, dW_t;
    std::vector<double> db_h, db_e, db_t;
    Matrix d_h = head.backward(d_scores, dW_h, db_h);
    Matrix d_e = extractor.backward(extr_drop_.backward(d_h), dW_e, db_e);
    trunk.backward(trunk_drop_.backward(d_e), dW_t, db_t);

    OptimizerConfig internal = cfg_.optimizer;
    internal.weight_decay = 0.0;
    OptimizerConfig final_head = cfg_.optimizer;
    final_head.weight_decay = cfg_.l2;
    sgd_nesterov_step(trunk, dW_t, db_t, internal);
    sgd_nesterov_step(extractor, dW_e, db_e, internal);
    sgd_nesterov_step(head, dW_h, db_h, final_head);
    return total;
}

std::vector<int> PlainZslModel::predict_classes(const Matrix& x, const AttributeMatrix& attrs,
                                                const std::vector<int>& class_set) {
    Rng unused(0);
    Matrix scores = forward(x, unused, false);
    Matrix sc = matmul_nt(scores, phi_rows(attrs, class_set));
    return argmax_classes(sc, class_set);
}

} // namespace gal
