#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gal/data.hpp"
#include "gal/gal_model.hpp"
#include "gal/grouping.hpp"

namespace gal {

// Mean over classes of within-class accuracy; classes with no instances in
// the eval set are excluded from the mean. Throws on an empty eval set.
double per_class_top1(const std::vector<int>& predictions, const std::vector<int>& labels,
                      const std::vector<int>& class_set);

struct ClassAccuracy {
    int class_id = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
};
std::vector<ClassAccuracy> per_class_breakdown(const std::vector<int>& predictions,
                                               const std::vector<int>& labels,
                                               const std::vector<int>& class_set);

struct EpochStats {
    double zsl_loss = 0.0;      // mean primary loss over the epoch's batches
    double adv_loss = 0.0;      // mean weighted adversarial term (lambda * delta * bce)
    double val_accuracy = 0.0;  // class-averaged on val classes; NaN without a val split
};

struct TrainReport {
    std::string config_echo;
    int group_count = 0;
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;        // 0-based; earliest epoch attaining max val accuracy
    double best_val_accuracy = 0.0;    // NaN without a val split
    double test_accuracy = 0.0;
    std::vector<ClassAccuracy> per_class;  // on the test split
    double wall_seconds = 0.0;
};

struct TrainResult {
    TrainReport report;
    GalNetwork model;  // parameters restored to the best-val epoch
};

// Shuffled minibatch training with validation-based model selection: after
// each epoch the network is scored on the val split (candidates = val
// classes); the best-epoch parameters are kept and the test split is scored
// once, at the end, on those. Without a val split the final epoch is kept.
TrainResult train(const Dataset& ds, const Grouping& grouping, const Matrix& delta_ij,
                  const GalConfig& cfg);

// Attribute-pair shift of a dataset for the grouping/weighting pipeline:
// correlations over train instances vs equally-weighted test class rows.
Matrix dataset_delta_matrix(const Dataset& ds);

// Spectral co-clustering of the dataset's shift structure into L groups.
Grouping grouping_for(const Dataset& ds, int L, std::uint64_t seed);

struct SearchSpace {
    std::vector<double> lambdas = {0.5, 1.0, 2.0};
    std::vector<double> margins = {1.0};
    std::vector<double> learning_rates = {0.01, 0.001};
    std::vector<std::size_t> batch_sizes = {64, 128};
    std::vector<double> dropouts = {0.2, 0.5};
    std::vector<int> group_counts = {3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<WeightingMode> weightings = {WeightingMode::delta_corr};

    void validate() const;  // every axis non-empty
    std::size_t size() const;
};

struct SweepPointResult {
    std::size_t index = 0;  // position in grid order
    GalConfig config;
    int group_count = 0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::size_t best_epoch = 0;
};

struct SweepResult {
    std::vector<SweepPointResult> points;  // grid order
    std::size_t best_index = 0;
    TrainReport best_report;
    GalNetwork best_model;
};

// Trains every grid point with a per-point seed derived from the master
// seed, selecting by val accuracy (ties: lower lambda, then grid order).
// Points run on up to `workers` threads; results are identical for any
// worker count. `fixed_grouping`, when given, replaces the group-count axis.
SweepResult sweep(const Dataset& ds, const SearchSpace& space, const GalConfig& base,
                  std::uint64_t master_seed, std::size_t workers,
                  const std::optional<Grouping>& fixed_grouping = std::nullopt);

struct ReportPaths {
    std::string report_txt;     // key: value summary
    std::string epochs_csv;     // epoch series
    std::string per_class_csv;  // test-split class breakdown
    std::string curves_svg;     // optional; empty skips the plot
};
void report_emit(const TrainReport& report, const ReportPaths& paths);

// grid_csv: one row per grid point. lambda_csv: best val accuracy per lambda
// value, for sensitivity plots. svg optional (empty skips).
void sweep_emit(const SweepResult& result, const std::string& grid_csv,
                const std::string& lambda_csv, const std::string& svg);

// Minimal self-contained SVG line chart (one polyline per series).
struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};
void write_line_svg(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Median (averages the middle pair for even sizes). Throws on empty input.
double median(std::vector<double> v);

} // namespace gal
