#include "gal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "gal/errors.hpp"

namespace gal {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<std::size_t> instances_of(const std::vector<int>& labels,
                                      const std::vector<int>& classes) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (std::find(classes.begin(), classes.end(), labels[i]) != classes.end())
            out.push_back(i);
    return out;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& rows, std::size_t lo,
                   std::size_t hi) {
    Matrix out(hi - lo, src.cols());
    for (std::size_t k = lo; k < hi; ++k)
        std::memcpy(out.row(k - lo), src.row(rows[k]), sizeof(double) * src.cols());
    return out;
}

// Chunked prediction over selected rows, so eval never builds a giant matrix.
std::vector<int> predict_rows(GalNetwork& net, const Matrix& features,
                              const std::vector<std::size_t>& rows, const AttributeMatrix& attrs,
                              const std::vector<int>& class_set) {
    constexpr std::size_t kChunk = 1024;
    std::vector<int> preds;
    preds.reserve(rows.size());
    for (std::size_t lo = 0; lo < rows.size(); lo += kChunk) {
        std::size_t hi = std::min(lo + kChunk, rows.size());
        Matrix x = gather_rows(features, rows, lo, hi);
        std::vector<int> p = net.predict_classes(x, attrs, class_set);
        preds.insert(preds.end(), p.begin(), p.end());
    }
    return preds;
}

std::vector<int> labels_at(const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t i : rows) out.push_back(labels[i]);
    return out;
}

double pearson_real(const std::vector<double>& a, const std::vector<double>& b) {
    std::size_t n = a.size();
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

} // namespace

double per_class_top1(const std::vector<int>& predictions, const std::vector<int>& labels,
                      const std::vector<int>& class_set) {
    if (labels.empty()) throw InputError("per_class_top1: empty evaluation set");
    if (predictions.size() != labels.size())
        throw DimensionError("per_class_top1: prediction/label count mismatch");
    for (int y : labels)
        if (std::find(class_set.begin(), class_set.end(), y) == class_set.end())
            throw InputError("per_class_top1: label " + std::to_string(y) +
                             " not in the candidate class set");
    double sum = 0.0;
    std::size_t present = 0;
    for (int c : class_set) {
        std::size_t total = 0, correct = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != c) continue;
            ++total;
            if (predictions[i] == c) ++correct;
        }
        if (total == 0) continue;  // class absent from the eval set
        sum += static_cast<double>(correct) / static_cast<double>(total);
        ++present;
    }
    if (present == 0) throw InputError("per_class_top1: no eval instance in the class set");
    return sum / static_cast<double>(present);
}

std::vector<ClassAccuracy> per_class_breakdown(const std::vector<int>& predictions,
                                               const std::vector<int>& labels,
                                               const std::vector<int>& class_set) {
    if (predictions.size() != labels.size())
        throw DimensionError("per_class_breakdown: prediction/label count mismatch");
    std::vector<ClassAccuracy> out;
    for (int c : class_set) {
        ClassAccuracy acc;
        acc.class_id = c;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != c) continue;
            ++acc.total;
            if (predictions[i] == c) ++acc.correct;
        }
        if (acc.total > 0) out.push_back(acc);
    }
    return out;
}

TrainResult train(const Dataset& ds, const Grouping& grouping, const Matrix& delta_ij,
                  const GalConfig& cfg_in) {
    auto t0 = std::chrono::steady_clock::now();
    ds.validate();
    GalConfig cfg = cfg_in;
    if (cfg.input_dim == 0) cfg.input_dim = ds.feature_dim();
    if (cfg.input_dim != ds.feature_dim())
        throw DimensionError("train: config input_dim " + std::to_string(cfg.input_dim) +
                             " != dataset feature dim " + std::to_string(ds.feature_dim()));
    if (grouping.assignment.size() != ds.attributes.num_attributes)
        throw DimensionError("train: grouping covers " +
                             std::to_string(grouping.assignment.size()) + " attributes, dataset has " +
                             std::to_string(ds.attributes.num_attributes));

    const std::vector<int>& train_classes = ds.split.train_classes;
    const std::vector<int>& val_classes = ds.split.val_classes;
    const std::vector<int>& test_classes = ds.split.test_classes;
    std::vector<std::size_t> train_rows = instances_of(ds.labels, train_classes);
    std::vector<std::size_t> val_rows = instances_of(ds.labels, val_classes);
    std::vector<std::size_t> test_rows = instances_of(ds.labels, test_classes);
    if (train_rows.empty()) throw InputError("train: no instances belong to the train classes");
    if (test_rows.empty()) throw InputError("train: no instances belong to the test classes");
    bool has_val = !val_classes.empty() && !val_rows.empty();
    std::vector<int> val_labels = labels_at(ds.labels, val_rows);
    std::vector<int> test_labels = labels_at(ds.labels, test_rows);

    GalNetwork net(cfg, grouping, delta_ij);
    Rng seed_root(cfg.seed);
    Rng shuffle_rng = seed_root.derive(3);
    Rng dropout_rng = seed_root.derive(4);

    TrainResult result;
    result.report.config_echo = cfg.echo();
    result.report.group_count = grouping.L;
    double nan = std::numeric_limits<double>::quiet_NaN();
    double best_val = -std::numeric_limits<double>::infinity();
    GalNetwork best_net = net;
    std::size_t best_epoch = 0;

    std::vector<std::size_t> order = train_rows;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double zsl_sum = 0.0, adv_sum = 0.0;
        for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
            std::size_t hi = std::min(lo + cfg.batch_size, order.size());
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                         order.begin() + static_cast<std::ptrdiff_t>(hi));
            Batch batch = make_batch(ds.features, ds.labels, ds.attributes, idx);
            StepMetrics m = net.training_step(batch, ds.attributes, train_classes, dropout_rng);
            double w = static_cast<double>(hi - lo);
            zsl_sum += m.zsl_loss * w;
            double adv = 0.0;
            const auto& arms = net.arms();
            for (std::size_t a = 0; a < arms.size(); ++a)
                adv += cfg.lambda *
                       net.delta_ij()(static_cast<std::size_t>(arms[a].i),
                                      static_cast<std::size_t>(arms[a].j)) *
                       m.adv_losses[a];
            adv_sum += adv * w;
        }
        EpochStats stats;
        stats.zsl_loss = zsl_sum / static_cast<double>(order.size());
        stats.adv_loss = adv_sum / static_cast<double>(order.size());
        stats.val_accuracy = nan;
        if (has_val) {
            std::vector<int> preds = predict_rows(net, ds.features, val_rows, ds.attributes,
                                                  val_classes);
            stats.val_accuracy = per_class_top1(preds, val_labels, val_classes);
            if (stats.val_accuracy > best_val) {
                best_val = stats.val_accuracy;
                best_net = net;
                best_epoch = epoch;
            }
        }
        result.report.epochs.push_back(stats);
    }
    if (!has_val) {
        best_net = net;
        best_epoch = cfg.epochs - 1;
        best_val = nan;
    }

    result.model = std::move(best_net);
    result.report.best_epoch = best_epoch;
    result.report.best_val_accuracy = best_val;
    std::vector<int> preds = predict_rows(result.model, ds.features, test_rows, ds.attributes,
                                          test_classes);
    result.report.test_accuracy = per_class_top1(preds, test_labels, test_classes);
    result.report.per_class = per_class_breakdown(preds, test_labels, test_classes);
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

Matrix dataset_delta_matrix(const Dataset& ds) {
    Matrix seen = corr_seen(ds.attributes, ds.labels, ds.split.train_classes);
    Matrix unseen = corr_unseen(ds.attributes, ds.split.test_classes);
    return delta_corr_matrix(seen, unseen);
}

Grouping grouping_for(const Dataset& ds, int L, std::uint64_t seed) {
    if (L < 1) throw InputError("grouping_for: group count must be >= 1");
    Matrix delta = dataset_delta_matrix(ds);
    return spectral_cocluster(affinity_from_delta(delta), L, seed);
}

void SearchSpace::validate() const {
    if (lambdas.empty() || margins.empty() || learning_rates.empty() || batch_sizes.empty() ||
        dropouts.empty() || group_counts.empty() || weightings.empty())
        throw InputError("sweep: every search-space axis must be non-empty");
    for (double l : lambdas)
        if (l < 0.0) throw InputError("sweep: lambda must be >= 0");
    for (int L : group_counts)
        if (L < 1) throw InputError("sweep: group count must be >= 1");
}

std::size_t SearchSpace::size() const {
    return lambdas.size() * margins.size() * learning_rates.size() * batch_sizes.size() *
           dropouts.size() * group_counts.size() * weightings.size();
}

SweepResult sweep(const Dataset& ds, const SearchSpace& space, const GalConfig& base,
                  std::uint64_t master_seed, std::size_t workers,
                  const std::optional<Grouping>& fixed_grouping) {
    space.validate();
    ds.validate();

    struct GroupOption {
        Grouping grouping;
        Matrix delta_ij;
    };
    Matrix delta = dataset_delta_matrix(ds);
    Rng master(master_seed);
    std::vector<GroupOption> group_options;
    if (fixed_grouping) {
        fixed_grouping->validate();
        group_options.push_back({*fixed_grouping, group_delta(delta, *fixed_grouping)});
    } else {
        for (int L : space.group_counts) {
            std::uint64_t gseed = master.derive(7000 + static_cast<std::uint64_t>(L)).next_u64();
            Grouping g = spectral_cocluster(affinity_from_delta(delta), L, gseed);
            group_options.push_back({g, group_delta(delta, g)});
        }
    }

    struct Point {
        GalConfig cfg;
        std::size_t group_option = 0;
    };
    std::vector<Point> grid;
    std::size_t index = 0;
    for (std::size_t gi = 0; gi < group_options.size(); ++gi)
        for (WeightingMode wm : space.weightings)
            for (std::size_t bs : space.batch_sizes)
                for (double lr : space.learning_rates)
                    for (double dp : space.dropouts)
                        for (double margin : space.margins)
                            for (double lambda : space.lambdas) {
                                Point p;
                                p.cfg = base;
                                p.cfg.input_dim = ds.feature_dim();
                                p.cfg.weighting = wm;
                                p.cfg.batch_size = bs;
                                p.cfg.optimizer.learning_rate = lr;
                                p.cfg.dropout_p = dp;
                                p.cfg.margin = margin;
                                p.cfg.lambda = lambda;
                                p.cfg.seed = master.derive(5000 + index).next_u64();
                                p.group_option = gi;
                                grid.push_back(p);
                                ++index;
                            }

    SweepResult result;
    result.points.resize(grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            try {
                const Point& p = grid[i];
                TrainResult tr = train(ds, group_options[p.group_option].grouping,
                                       group_options[p.group_option].delta_ij, p.cfg);
                SweepPointResult& out = result.points[i];
                out.index = i;
                out.config = p.cfg;
                out.group_count = group_options[p.group_option].grouping.L;
                out.val_accuracy = tr.report.best_val_accuracy;
                out.test_accuracy = tr.report.test_accuracy;
                out.best_epoch = tr.report.best_epoch;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, grid.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // selection: highest val accuracy, ties to lower lambda, then grid order
    std::size_t best = 0;
    auto key_better = [&](const SweepPointResult& a, const SweepPointResult& b) {
        double va = std::isnan(a.val_accuracy) ? -std::numeric_limits<double>::infinity()
                                               : a.val_accuracy;
        double vb = std::isnan(b.val_accuracy) ? -std::numeric_limits<double>::infinity()
                                               : b.val_accuracy;
        if (va != vb) return va > vb;
        if (a.config.lambda != b.config.lambda) return a.config.lambda < b.config.lambda;
        return a.index < b.index;
    };
    for (std::size_t i = 1; i < result.points.size(); ++i)
        if (key_better(result.points[i], result.points[best])) best = i;
    result.best_index = best;

    const Point& bp = grid[best];
    TrainResult tr = train(ds, group_options[bp.group_option].grouping,
                           group_options[bp.group_option].delta_ij, bp.cfg);
    result.best_report = std::move(tr.report);
    result.best_model = std::move(tr.model);
    return result;
}

void report_emit(const TrainReport& report, const ReportPaths& paths) {
    if (!paths.report_txt.empty()) {
        std::ofstream out(paths.report_txt);
        if (!out) throw InputError("cannot write report: " + paths.report_txt);
        out << report.config_echo;
        out << "group_count=" << report.group_count << "\n";
        out << "epochs_run=" << report.epochs.size() << "\n";
        out << "best_epoch=" << report.best_epoch << "\n";
        out << "best_val_accuracy=" << fmt(report.best_val_accuracy) << "\n";
        out << "test_accuracy=" << fmt(report.test_accuracy) << "\n";
        out << "wall_seconds=" << fmt(report.wall_seconds) << "\n";
        if (!out) throw InputError("failed writing report: " + paths.report_txt);
    }
    if (!paths.epochs_csv.empty()) {
        std::ofstream out(paths.epochs_csv);
        if (!out) throw InputError("cannot write epoch series: " + paths.epochs_csv);
        out << "epoch,zsl_loss,adv_loss,val_accuracy\n";
        for (std::size_t e = 0; e < report.epochs.size(); ++e)
            out << e << ',' << fmt(report.epochs[e].zsl_loss) << ','
                << fmt(report.epochs[e].adv_loss) << ',' << fmt(report.epochs[e].val_accuracy)
                << "\n";
        if (!out) throw InputError("failed writing epoch series: " + paths.epochs_csv);
    }
    if (!paths.per_class_csv.empty()) {
        std::ofstream out(paths.per_class_csv);
        if (!out) throw InputError("cannot write class breakdown: " + paths.per_class_csv);
        out << "class_id,correct,total,accuracy\n";
        for (const auto& c : report.per_class)
            out << c.class_id << ',' << c.correct << ',' << c.total << ','
                << fmt(static_cast<double>(c.correct) / static_cast<double>(c.total)) << "\n";
        if (!out) throw InputError("failed writing class breakdown: " + paths.per_class_csv);
    }
    if (!paths.curves_svg.empty()) {
        std::vector<PlotSeries> series;
        PlotSeries val{"val accuracy", {}, {}};
        PlotSeries loss{"train loss", {}, {}};
        for (std::size_t e = 0; e < report.epochs.size(); ++e) {
            double x = static_cast<double>(e);
            if (!std::isnan(report.epochs[e].val_accuracy)) {
                val.x.push_back(x);
                val.y.push_back(report.epochs[e].val_accuracy);
            }
            loss.x.push_back(x);
            loss.y.push_back(report.epochs[e].zsl_loss + report.epochs[e].adv_loss);
        }
        if (!val.x.empty()) series.push_back(std::move(val));
        series.push_back(std::move(loss));
        write_line_svg(paths.curves_svg, "training curves", series);
    }
}

void sweep_emit(const SweepResult& result, const std::string& grid_csv,
                const std::string& lambda_csv, const std::string& svg) {
    if (!grid_csv.empty()) {
        std::ofstream out(grid_csv);
        if (!out) throw InputError("cannot write sweep grid: " + grid_csv);
        out << "index,lambda,margin,learning_rate,batch_size,dropout,group_count,weighting,seed,"
               "val_accuracy,test_accuracy,best_epoch\n";
        for (const auto& p : result.points)
            out << p.index << ',' << fmt(p.config.lambda) << ',' << fmt(p.config.margin) << ','
                << fmt(p.config.optimizer.learning_rate) << ',' << p.config.batch_size << ','
                << fmt(p.config.dropout_p) << ',' << p.group_count << ','
                << to_string(p.config.weighting) << ',' << p.config.seed << ','
                << fmt(p.val_accuracy) << ',' << fmt(p.test_accuracy) << ',' << p.best_epoch
                << "\n";
        if (!out) throw InputError("failed writing sweep grid: " + grid_csv);
    }

    // best val accuracy at each lambda, for sensitivity inspection
    std::vector<double> lambdas;
    for (const auto& p : result.points)
        if (std::find(lambdas.begin(), lambdas.end(), p.config.lambda) == lambdas.end())
            lambdas.push_back(p.config.lambda);
    std::sort(lambdas.begin(), lambdas.end());
    std::vector<double> best_val(lambdas.size(), -std::numeric_limits<double>::infinity());
    for (const auto& p : result.points) {
        std::size_t k = static_cast<std::size_t>(
            std::find(lambdas.begin(), lambdas.end(), p.config.lambda) - lambdas.begin());
        if (!std::isnan(p.val_accuracy)) best_val[k] = std::max(best_val[k], p.val_accuracy);
    }
    if (!lambda_csv.empty()) {
        std::ofstream out(lambda_csv);
        if (!out) throw InputError("cannot write lambda series: " + lambda_csv);
        out << "lambda,val_accuracy\n";
        for (std::size_t k = 0; k < lambdas.size(); ++k)
            out << fmt(lambdas[k]) << ',' << fmt(best_val[k]) << "\n";
        if (!out) throw InputError("failed writing lambda series: " + lambda_csv);
    }
    if (!svg.empty()) {
        PlotSeries s{"best val accuracy", lambdas, best_val};
        write_line_svg(svg, "adversarial weight sensitivity", {s});
    }
}

void write_line_svg(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series) {
    constexpr double W = 800, H = 500, ML = 70, MR = 20, MT = 45, MB = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmin <= xmax)) {  // no finite points: draw an empty frame
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write plot: " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"16\">" << xml_escape(title) << "</text>\n"
        << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
        << H - MB << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double fx = xmin + (xmax - xmin) * t / 4.0;
        double fy = ymin + (ymax - ymin) * t / 4.0;
        out << "<text x=\"" << px(fx) << "\" y=\"" << H - MB + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(fx)
            << "</text>\n"
            << "<text x=\"" << ML - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(fy)
            << "</text>\n"
            << "<line x1=\"" << ML << "\" y1=\"" << py(fy) << "\" x2=\"" << W - MR << "\" y2=\""
            << py(fy) << "\" stroke=\"#dddddd\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = palette[si % 5];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        out << "\"/>\n";
        double ly = MT + 16.0 * static_cast<double>(si);
        out << "<line x1=\"" << W - MR - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - MR - 130
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << W - MR - 124 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.name)
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw InputError("failed writing plot: " + path);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("spearman: length mismatch");
    if (a.size() < 2) throw InputError("spearman: need at least 2 points");
    return pearson_real(average_ranks(a), average_ranks(b));
}

double median(std::vector<double> v) {
    if (v.empty()) throw InputError("median: empty input");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace gal
