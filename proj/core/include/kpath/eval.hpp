#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kpath/bovw.hpp"
#include "kpath/dataset.hpp"
#include "kpath/iksvm.hpp"
#include "kpath/kmeans.hpp"
#include "kpath/metrics.hpp"

namespace kpath {

enum class Protocol { LooNN, Folds20Bovw };

std::string_view protocol_name(Protocol p) noexcept;

/// Axes of the result tables. Fields that do not apply to a protocol stay
/// empty / zero and are written as empty CSV cells.
struct EvalConfig {
    std::string metric;
    std::string classifier;
    int p = 0;
    int r = 0;
    std::string grid;
    int dim = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

struct EvalReport {
    Protocol protocol = Protocol::LooNN;
    EvalConfig config;
    double accuracy = 0.0;
    std::vector<double> fold_accuracies;
    /// confusion[true][predicted]
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<int> predictions;  // LOO only: predicted label per item

    std::size_t total() const;
    std::size_t correct() const;
};

/// Each item is labeled by its nearest other item (ties to the lower index);
/// accuracy = correct / N. Queries are evaluated in parallel.
EvalReport loo_nn_accuracy(const std::vector<FeatureVector>& features, const std::vector<int>& labels, MetricKind m,
                           std::size_t n_classes = 0);

/// Test ids for each fold: `per_class` images per class drawn without
/// replacement inside the fold, each fold from its own seeded stream.
struct FoldPlan {
    std::vector<std::vector<std::size_t>> test_ids;  // sorted ascending per fold
    std::uint64_t seed = 0;
};

FoldPlan make_fold_plan(const std::vector<int>& labels, int folds, int per_class, std::uint64_t seed);

/// IKSVM or nearest neighbor under a metric.
struct Classifier {
    bool iksvm = false;
    MetricKind metric = MetricKind::L2;

    static Classifier parse(std::string_view name);  // "iksvm" or a metric name
    std::string name() const;
};

struct BovwEvalConfig {
    GridStrategy grid{16, 8};
    int dim = 256;
    std::size_t k = 800;
    std::vector<Classifier> classifiers{Classifier{true, MetricKind::L2}};
    int folds = 20;
    int test_per_class = 2;
    /// Training descriptors sampled per fold for k-means; 0 uses all of them.
    std::size_t codebook_sample = 30000;
    std::vector<double> c_grid = kDefaultCGrid;
    int cv_folds = 3;
    KMeansOptions kmeans;
    SvmOptions svm;
};

/// What each fold consumed, for structural leakage checks.
struct FoldTrace {
    std::vector<std::size_t> test_ids;
    std::vector<std::size_t> codebook_image_ids;  // images contributing descriptors to k-means
    std::vector<std::size_t> train_ids;           // reference / SVM training images
    double selected_c = 0.0;
};

/// 20-fold BoVW protocol. One report per classifier, all sharing the folds,
/// codebooks and encodings. Folds run sequentially; work inside a fold is parallel.
std::vector<EvalReport> folds20_bovw(const Dataset& ds, const BovwEvalConfig& cfg, std::uint64_t seed,
                                     std::vector<FoldTrace>* trace = nullptr);

enum class LbpMode { Uniform, Raw };
std::string_view lbp_mode_name(LbpMode m) noexcept;

struct LbpSweepConfig {
    std::vector<int> radii{1, 2, 3, 4, 5};
    std::vector<int> neighbors{4, 8, 12, 16, 20, 24};
    std::vector<MetricKind> metrics{MetricKind::Chi2, MetricKind::L2, MetricKind::L1};
    std::vector<LbpMode> modes{LbpMode::Uniform};
};

/// Whole-image LBP histograms (L1-normalized) + LOO nearest neighbor for every
/// (metric, mode, r, p). Raw mode with p > 16 is evaluated with uniform
/// histograms, and the report's classifier column says so ("nn-uniform").
std::vector<EvalReport> sweep_lbp(const Dataset& ds, const LbpSweepConfig& cfg);

/// Whole-image LBP histograms for every image of the dataset.
std::vector<FeatureVector> lbp_features(const Dataset& ds, const LbpConfig& cfg);

EvalReport eval_feature_file(const std::filesystem::path& path, MetricKind m,
                             const std::optional<std::filesystem::path>& labels = std::nullopt);

/// `protocol,metric,classifier,p,r,grid,dim,k,seed,fold,accuracy`; one row per
/// fold (if any) then a `fold=mean` summary row. Accuracies as fractions, 4 decimals.
void write_csv_header(std::ostream& os);
void write_csv_rows(std::ostream& os, const EvalReport& report);
void write_csv(std::ostream& os, const std::vector<EvalReport>& reports);

}  // namespace kpath
