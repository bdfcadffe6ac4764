#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gal/data.hpp"
#include "gal/errors.hpp"
#include "gal/gal_model.hpp"
#include "gal/grouping.hpp"
#include "gal/harness.hpp"
#include "gal/shift.hpp"
#include "gal/synth.hpp"

namespace {

using namespace gal;

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InputError("config: " + key + " expects a non-negative integer, got '" + value + "'");
    }
}

double parse_f64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InputError("config: " + key + " expects a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw InputError("config: " + key + " expects a boolean, got '" + value + "'");
}

void set_config(GalConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "input_dim") cfg.input_dim = parse_u64(key, value);
    else if (key == "trunk_width") cfg.trunk_width = parse_u64(key, value);
    else if (key == "group_width") cfg.group_width = parse_u64(key, value);
    else if (key == "trunk_mode") cfg.trunk_mode = trunk_mode_from_string(value);
    else if (key == "loss") cfg.loss = loss_kind_from_string(value);
    else if (key == "lambda") cfg.lambda = parse_f64(key, value);
    else if (key == "margin") cfg.margin = parse_f64(key, value);
    else if (key == "dropout") cfg.dropout_p = parse_f64(key, value);
    else if (key == "l2") cfg.l2 = parse_f64(key, value);
    else if (key == "weighting") cfg.weighting = weighting_mode_from_string(value);
    else if (key == "learning_rate") cfg.optimizer.learning_rate = parse_f64(key, value);
    else if (key == "momentum") cfg.optimizer.momentum = parse_f64(key, value);
    else if (key == "nesterov") cfg.optimizer.nesterov = parse_bool(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_u64(key, value);
    else if (key == "epochs") cfg.epochs = parse_u64(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else throw InputError("config: unknown key '" + key + "'");
}

void apply_assignment(GalConfig& cfg, const std::string& kv, const std::string& where) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw InputError(where + ": expected key=value, got '" + kv + "'");
    set_config(cfg, kv.substr(0, eq), kv.substr(eq + 1));
}

void load_config_file(GalConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        apply_assignment(cfg, line.substr(first, last - first + 1),
                         path + ":" + std::to_string(lineno));
    }
}

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool deterministic = false;
    std::size_t workers = 0;  // 0 -> hardware concurrency
};

std::size_t effective_workers(const GlobalOpts& g) {
    if (g.deterministic) return 1;
    if (g.workers > 0) return g.workers;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

// Build the model config for train/sweep: file first, then --set overrides,
// then an explicit global --seed.
GalConfig build_config(const std::string& config_path, const std::vector<std::string>& sets,
                       const GlobalOpts& g) {
    GalConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    for (const auto& kv : sets) apply_assignment(cfg, kv, "--set");
    if (g.seed_given) cfg.seed = g.seed;
    return cfg;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw InputError("cannot write output file: " + path);
    return file;
}

Grouping resolve_grouping(const Dataset& ds, const std::string& grouping_path, int groups,
                          std::uint64_t seed) {
    if (!grouping_path.empty()) return load_grouping(grouping_path, ds.attributes.num_attributes);
    return grouping_for(ds, groups, seed);
}

std::string dataset_name(const std::string& dir) {
    std::filesystem::path p(dir);
    std::string name = p.filename().string();
    if (name.empty()) name = p.parent_path().filename().string();
    return name.empty() ? dir : name;
}

int cmd_analyze(const std::string& data_dir, const std::string& out_path) {
    Dataset ds = load_dataset(data_dir);
    SplitAudit audit = split_audit(ds);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "dataset,delta_corr_mean,delta_corr_mean_top_half\n";
    out << dataset_name(data_dir) << ',' << audit.shift.mean << ',' << audit.shift.mean_at_top_half
        << "\n";
    return 0;
}

int cmd_audit(const std::string& data_dir, const std::string& out_path) {
    Dataset ds = load_dataset(data_dir);
    SplitAudit audit = split_audit(ds);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "dataset,train_classes,val_classes,test_classes,train_instances,val_instances,"
           "test_instances,delta_corr_mean,delta_corr_mean_top_half\n";
    out << dataset_name(data_dir) << ',' << ds.split.train_classes.size() << ','
        << ds.split.val_classes.size() << ',' << ds.split.test_classes.size() << ','
        << audit.train_instances << ',' << audit.val_instances << ',' << audit.test_instances
        << ',' << audit.shift.mean << ',' << audit.shift.mean_at_top_half << "\n";
    return 0;
}

int cmd_group(const std::string& data_dir, int groups, const std::string& out_path,
              const GlobalOpts& g) {
    Dataset ds = load_dataset(data_dir);
    Grouping grouping = grouping_for(ds, groups, g.seed);
    if (out_path.empty()) {
        for (int gi = 0; gi < grouping.L; ++gi) {
            std::cout << gi << ':';
            for (std::size_t a = 0; a < grouping.assignment.size(); ++a)
                if (grouping.assignment[a] == gi) std::cout << ' ' << a;
            std::cout << "\n";
        }
    } else {
        save_grouping(grouping, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_cs_split(const std::string& data_dir, int n_train, int n_val, int n_test,
                 const std::string& out_path, int beam, bool refine, const GlobalOpts& g) {
    Dataset ds = load_dataset(data_dir);
    SplitCounts counts{n_train, n_val, n_test};
    SplitDef split = cs_split(ds.attributes, counts, g.seed, beam, refine);
    std::string out = out_path.empty() ? data_dir + "/splits_cs.txt" : out_path;
    save_split(split, out);
    std::vector<int> held = split.train_classes;
    held.insert(held.end(), split.val_classes.begin(), split.val_classes.end());
    std::cout << "wrote " << out << "\n"
              << "mean_delta_corr=" << split_shift_objective(ds.attributes, held, split.test_classes)
              << "\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::vector<std::string>& sets, const std::string& grouping_path, int groups,
              const std::string& out_dir, const GlobalOpts& g) {
    Dataset ds = load_dataset(data_dir);
    GalConfig cfg = build_config(config_path, sets, g);
    Grouping grouping = resolve_grouping(ds, grouping_path, groups, g.seed);
    Matrix delta_ij = group_delta(dataset_delta_matrix(ds), grouping);
    TrainResult result = train(ds, grouping, delta_ij, cfg);

    std::filesystem::create_directories(out_dir);
    ReportPaths paths;
    paths.report_txt = out_dir + "/report.txt";
    paths.epochs_csv = out_dir + "/epochs.csv";
    paths.per_class_csv = out_dir + "/per_class.csv";
    paths.curves_svg = out_dir + "/curves.svg";
    report_emit(result.report, paths);
    result.model.save(out_dir + "/model.galm");
    save_grouping(grouping, out_dir + "/grouping.txt");
    std::cout << "test_accuracy=" << result.report.test_accuracy << "\n"
              << "best_epoch=" << result.report.best_epoch << "\n"
              << "wrote " << out_dir << "/report.txt\n";
    return 0;
}

int cmd_sweep(const std::string& data_dir, const std::string& config_path,
              const std::vector<std::string>& sets, const std::string& grouping_path,
              SearchSpace space, const std::vector<std::string>& weighting_names,
              const std::string& out_dir, const GlobalOpts& g) {
    Dataset ds = load_dataset(data_dir);
    GalConfig base = build_config(config_path, sets, g);
    if (!weighting_names.empty()) {
        space.weightings.clear();
        for (const auto& w : weighting_names)
            space.weightings.push_back(weighting_mode_from_string(w));
    }
    std::optional<Grouping> fixed;
    if (!grouping_path.empty())
        fixed = load_grouping(grouping_path, ds.attributes.num_attributes);
    SweepResult result = sweep(ds, space, base, g.seed, effective_workers(g), fixed);

    std::filesystem::create_directories(out_dir);
    sweep_emit(result, out_dir + "/grid.csv", out_dir + "/lambda_vs_val.csv",
               out_dir + "/lambda_vs_val.svg");
    ReportPaths paths;
    paths.report_txt = out_dir + "/best_report.txt";
    paths.epochs_csv = out_dir + "/best_epochs.csv";
    paths.per_class_csv = out_dir + "/best_per_class.csv";
    paths.curves_svg = out_dir + "/best_curves.svg";
    report_emit(result.best_report, paths);
    result.best_model.save(out_dir + "/best_model.galm");

    const SweepPointResult& best = result.points[result.best_index];
    std::cout << "grid_points=" << result.points.size() << "\n"
              << "best_index=" << best.index << "\n"
              << "best_lambda=" << best.config.lambda << "\n"
              << "best_val_accuracy=" << best.val_accuracy << "\n"
              << "best_test_accuracy=" << result.best_report.test_accuracy << "\n"
              << "wrote " << out_dir << "/grid.csv\n";
    return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& model_path, const std::string& split,
             const std::string& out_path) {
    Dataset ds = load_dataset(data_dir);
    GalNetwork net = GalNetwork::load(model_path);
    if (net.config().input_dim != ds.feature_dim())
        throw DimensionError("eval: model input dim " + std::to_string(net.config().input_dim) +
                             " != dataset feature dim " + std::to_string(ds.feature_dim()));
    if (net.grouping().assignment.size() != ds.attributes.num_attributes)
        throw DimensionError("eval: model expects " +
                             std::to_string(net.grouping().assignment.size()) +
                             " attributes, dataset has " +
                             std::to_string(ds.attributes.num_attributes));
    const std::vector<int>* classes = nullptr;
    if (split == "train") classes = &ds.split.train_classes;
    else if (split == "val") classes = &ds.split.val_classes;
    else if (split == "test") classes = &ds.split.test_classes;
    else throw UsageError("eval: --split must be train, val, or test");
    if (classes->empty()) throw InputError("eval: the " + split + " split has no classes");

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (std::find(classes->begin(), classes->end(), ds.labels[i]) != classes->end())
            rows.push_back(i);
    if (rows.empty()) throw InputError("eval: the " + split + " split has no instances");

    Matrix x(rows.size(), ds.feature_dim());
    std::vector<int> labels(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t c = 0; c < ds.feature_dim(); ++c) x(k, c) = ds.features(rows[k], c);
        labels[k] = ds.labels[rows[k]];
    }
    std::vector<int> preds = net.predict_classes(x, ds.attributes, *classes);
    double acc = per_class_top1(preds, labels, *classes);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "split=" << split << "\n"
        << "instances=" << rows.size() << "\n"
        << "class_avg_accuracy=" << acc << "\n";
    for (const auto& c : per_class_breakdown(preds, labels, *classes))
        out << "class_" << c.class_id << '=' << c.correct << '/' << c.total << "\n";
    return 0;
}

int cmd_synth(SynthConfig cfg, const std::vector<double>& lambdas, const std::string& out_dir,
              bool svg, const GlobalOpts& g) {
    if (g.seed_given) cfg.seed = g.seed;
    SuiteResult suite = run_two_label_suite(cfg, lambdas);

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/synth_accuracy.csv");
        if (!out) throw InputError("cannot write " + out_dir + "/synth_accuracy.csv");
        out << "model,lambda,test_rho,accuracy\n";
        for (const auto& run : suite.runs)
            for (std::size_t k = 0; k < suite.test_rhos.size(); ++k)
                out << to_string(run.model) << ',' << run.lambda << ',' << suite.test_rhos[k]
                    << ',' << run.accuracy[k] << "\n";
    }
    {
        std::ofstream out(out_dir + "/synth_weights.csv");
        if (!out) throw InputError("cannot write " + out_dir + "/synth_weights.csv");
        out << "model,lambda,feature_index,weight\n";
        for (const auto& run : suite.runs)
            for (std::size_t d = 0; d < run.weights.size(); ++d)
                out << to_string(run.model) << ',' << run.lambda << ',' << d << ','
                    << run.weights[d] << "\n";
    }
    if (svg) {
        std::vector<PlotSeries> series;
        for (const auto& run : suite.runs) {
            std::ostringstream name;
            name << to_string(run.model);
            if (run.model == SynthModel::adversary) name << " (w=" << run.lambda << ")";
            series.push_back({name.str(), suite.test_rhos, run.accuracy});
        }
        write_line_svg(out_dir + "/synth_accuracy.svg", "accuracy vs test label correlation",
                       series);
    }
    std::cout << "wrote " << out_dir << "/synth_accuracy.csv\n"
              << "wrote " << out_dir << "/synth_weights.csv\n";
    if (svg) std::cout << "wrote " << out_dir << "/synth_accuracy.svg\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlation-shift analysis and grouped adversarial training for "
                 "attribute-based zero-shot learning"};
    app.require_subcommand(1);

    GlobalOpts g;
    auto* seed_opt = app.add_option("--seed", g.seed, "master RNG seed (default 0)");
    app.add_flag("--deterministic", g.deterministic, "single-threaded execution");
    app.add_option("--workers", g.workers, "max worker threads (default: hardware)");

    std::string data_dir, out_path, out_dir = ".", config_path, grouping_path, model_path;
    std::string eval_split = "test";
    std::vector<std::string> sets, weighting_names;
    int groups = 3, n_train = 0, n_val = 0, n_test = 0, beam = 16;
    bool no_refine = false, synth_svg = false;

    auto* analyze = app.add_subcommand("analyze", "report the dataset's correlation shift");
    analyze->add_option("--data", data_dir, "dataset directory")->required();
    analyze->add_option("--out", out_path, "output CSV path (default stdout)");

    auto* audit = app.add_subcommand("audit", "split statistics plus correlation shift");
    audit->add_option("--data", data_dir, "dataset directory")->required();
    audit->add_option("--out", out_path, "output CSV path (default stdout)");

    auto* group = app.add_subcommand("group", "cluster attributes by correlation shift");
    group->add_option("--data", data_dir, "dataset directory")->required();
    group->add_option("--groups", groups, "number of groups")->required();
    group->add_option("--out", out_path, "grouping file path (default stdout)");

    auto* cssplit = app.add_subcommand("cs-split", "build a shift-maximizing class split");
    cssplit->add_option("--data", data_dir, "dataset directory")->required();
    cssplit->add_option("--train", n_train, "train class count")->required();
    cssplit->add_option("--val", n_val, "val class count")->required();
    cssplit->add_option("--test", n_test, "test class count")->required();
    cssplit->add_option("--out", out_path, "output split path (default DATA/splits_cs.txt)");
    cssplit->add_option("--beam", beam, "beam width for the large-scale search (default 16)");
    cssplit->add_flag("--no-refine", no_refine, "skip swap refinement");

    auto* train_cmd = app.add_subcommand("train", "train one grouped adversarial network");
    train_cmd->add_option("--data", data_dir, "dataset directory")->required();
    train_cmd->add_option("--config", config_path, "key=value config file");
    train_cmd->add_option("--set", sets, "config override key=value (repeatable)");
    train_cmd->add_option("--grouping", grouping_path, "grouping file (default: computed)");
    train_cmd->add_option("--groups", groups, "group count when computing the grouping");
    train_cmd->add_option("--out-dir", out_dir, "output directory (default .)");

    auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sweep with val selection");
    SearchSpace space;
    sweep_cmd->add_option("--data", data_dir, "dataset directory")->required();
    sweep_cmd->add_option("--config", config_path, "key=value config file");
    sweep_cmd->add_option("--set", sets, "config override key=value (repeatable)");
    sweep_cmd->add_option("--grouping", grouping_path, "fixed grouping file");
    sweep_cmd->add_option("--lambdas", space.lambdas, "adversarial weights")->delimiter(',');
    sweep_cmd->add_option("--margins", space.margins, "margins")->delimiter(',');
    sweep_cmd->add_option("--lrs", space.learning_rates, "learning rates")->delimiter(',');
    sweep_cmd->add_option("--batches", space.batch_sizes, "batch sizes")->delimiter(',');
    sweep_cmd->add_option("--dropouts", space.dropouts, "dropout rates")->delimiter(',');
    sweep_cmd->add_option("--groups", space.group_counts, "group counts")->delimiter(',');
    sweep_cmd->add_option("--weightings", weighting_names, "delta-corr and/or equal")
        ->delimiter(',');
    sweep_cmd->add_option("--out-dir", out_dir, "output directory (default .)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    eval_cmd->add_option("--data", data_dir, "dataset directory")->required();
    eval_cmd->add_option("--model", model_path, "checkpoint path")->required();
    eval_cmd->add_option("--split", eval_split, "train|val|test (default test)");
    eval_cmd->add_option("--out", out_path, "output path (default stdout)");

    auto* synth_cmd = app.add_subcommand("synth", "two-label target-shift study");
    SynthConfig synth_cfg;
    std::vector<double> synth_lambdas = {0.5, 1.0, 2.0};
    synth_cmd->add_option("--sep", synth_cfg.separation, "class-mean separation (default 1.5)");
    synth_cmd->add_option("--train-rho", synth_cfg.train_rho, "train correlation (default 0.6)");
    synth_cmd->add_option("--rhos", synth_cfg.test_rhos, "test correlation grid")->delimiter(',');
    synth_cmd->add_option("--lambdas", synth_lambdas, "adversary weights")->delimiter(',');
    synth_cmd->add_option("--n-train", synth_cfg.n_train, "train instances (default 1000)");
    synth_cmd->add_option("--n-test", synth_cfg.n_test, "test instances (default 50000)");
    synth_cmd->add_option("--epochs", synth_cfg.epochs, "training epochs (default 200)");
    synth_cmd->add_option("--out-dir", out_dir, "output directory (default .)");
    synth_cmd->add_flag("--svg", synth_svg, "also write an SVG chart");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(gal::ErrorCategory::usage);
    }

    g.seed_given = seed_opt->count() > 0;
    try {
        if (*analyze) return cmd_analyze(data_dir, out_path);
        if (*audit) return cmd_audit(data_dir, out_path);
        if (*group) return cmd_group(data_dir, groups, out_path, g);
        if (*cssplit)
            return cmd_cs_split(data_dir, n_train, n_val, n_test, out_path, beam, !no_refine, g);
        if (*train_cmd)
            return cmd_train(data_dir, config_path, sets, grouping_path, groups, out_dir, g);
        if (*sweep_cmd)
            return cmd_sweep(data_dir, config_path, sets, grouping_path, space, weighting_names,
                             out_dir, g);
        if (*eval_cmd) return cmd_eval(data_dir, model_path, eval_split, out_path);
        if (*synth_cmd) return cmd_synth(synth_cfg, synth_lambdas, out_dir, synth_svg, g);
        std::cerr << "error: no subcommand selected\n";
        return static_cast<int>(gal::ErrorCategory::usage);
    } catch (const gal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
