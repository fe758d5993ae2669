#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "kpath/metrics.hpp"

namespace kpath {

/// Histogram intersection kernel sum_i min(u_i, v_i).
/// Throws std::invalid_argument on length mismatch or negative entries.
double hik(std::span<const double> u, std::span<const double> v);

/// Row-major n x n matrix of hik over all pairs of rows of X.
std::vector<double> hik_gram(const std::vector<FeatureVector>& X);

/// SMO did not reach the KKT tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double violation)
        : std::runtime_error(what), violation_(violation) {}
    double violation() const noexcept { return violation_; }

private:
    double violation_;
};

struct SvmOptions {
    /// Stop when the maximal KKT violation (m(alpha) - M(alpha)) drops below this.
    double tolerance = 1e-3;
    std::size_t max_iterations = 100000;
};

/// Solution of the soft-margin dual
///   max_a  sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij,  0 <= a_i <= C,  sum a_i y_i = 0.
struct DualSolution {
    std::vector<double> alpha;
    double bias = 0.0;           // f(x) = sum a_i y_i K(x_i, x) + bias
    double violation = 0.0;      // final m(alpha) - M(alpha)
    std::size_t iterations = 0;
};

/// SMO with maximal-violating-pair working set selection over a precomputed
/// kernel matrix (row-major, y.size() x y.size()). Labels must be +1/-1 and both present.
DualSolution solve_dual(std::span<const double> gram, std::span<const int> y, double C, const SvmOptions& options = {});

/// sum a_i - 1/2 a^T Q a with Q_ij = y_i y_j K_ij.
double dual_objective(std::span<const double> gram, std::span<const int> y, std::span<const double> alpha);

struct BinarySvmModel {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> dual_coefs;  // alpha_i * y_i
    double bias = 0.0;
    double C = 1.0;

    double decision(std::span<const double> x) const;
};

/// Support vectors are the points with alpha_i > 1e-12.
BinarySvmModel train_binary(const std::vector<FeatureVector>& X, const std::vector<int>& y, double C,
                            const SvmOptions& options = {});

/// One binary model per unordered class pair (a, b), a < b; +1 means class a.
struct MulticlassModel {
    struct Pair {
        int positive = 0;
        int negative = 0;
        BinarySvmModel model;
    };
    std::vector<int> classes;  // sorted
    std::vector<Pair> pairs;
    std::size_t dim = 0;
};

/// One-vs-one training. Pairwise problems are independent and trained in parallel.
MulticlassModel train_multiclass(const std::vector<FeatureVector>& X, const std::vector<int>& labels, double C,
                                 const SvmOptions& options = {});

/// Same as above but reuses a precomputed hik_gram(X).
MulticlassModel train_multiclass(const std::vector<FeatureVector>& X, const std::vector<int>& labels,
                                 std::span<const double> gram, double C, const SvmOptions& options = {});

struct Prediction {
    int label = 0;
    std::vector<int> votes;                 // aligned with model.classes
    std::vector<double> decision_strength;  // sum of |f| over won pairs
};

/// Majority vote over pairwise decisions (f >= 0 votes for the positive class).
/// Ties go to the class with the larger decision_strength, then the lower label.
Prediction predict_votes(const MulticlassModel& model, std::span<const double> x);
int predict(const MulticlassModel& model, std::span<const double> x);

struct CSelection {
    double best_c = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_accuracy;  // aligned with grid
};

inline const std::vector<double> kDefaultCGrid{0.01, 0.1, 1.0, 10.0, 100.0};

/// Stratified k-fold assignment: each class's members are shuffled with a
/// class-specific stream of `seed` and dealt round-robin into folds.
/// Throws std::invalid_argument if a class has fewer than `folds` members.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

/// Stratified cross-validation over the C grid. Highest mean fold accuracy
/// wins; ties go to the smaller C.
CSelection select_c(const std::vector<FeatureVector>& X, const std::vector<int>& labels,
                    const std::vector<double>& grid = kDefaultCGrid, int folds = 3, std::uint64_t seed = 42,
                    const SvmOptions& options = {});

/// Binary file: "KPSV", u16 version, u32 dim, u32 class count, i32 classes,
/// u32 pair count, then per pair: i32 positive, i32 negative, f64 C, f64 bias,
/// u32 support vector count, and per support vector f64 coefficient + dim f64 values.
void save_model(const std::filesystem::path& path, const MulticlassModel& model);
MulticlassModel load_model(const std::filesystem::path& path);

}  // namespace kpath
