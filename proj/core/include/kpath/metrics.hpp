#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kpath {

using FeatureVector = std::vector<double>;

enum class MetricKind { L1, L2, Chi2, Chi2Abs, Cosine };

/// Accepts the CLI spellings `l1|l2|chi2|chi2abs|cosine`.
MetricKind parse_metric(std::string_view name);
std::string_view metric_name(MetricKind m) noexcept;

// All functions throw std::invalid_argument on length mismatch and accumulate
// in double precision, sequentially in index order.

/// 0.5 * sum (p_i - q_i)^2 / (p_i + q_i); bins with p_i + q_i == 0 contribute 0.
/// Signed inputs are accepted and evaluated as written, even though the result
/// is then no longer a meaningful distance.
double chi2(std::span<const double> p, std::span<const double> q);
/// chi2 of element-wise absolute values.
double chi2_abs(std::span<const double> p, std::span<const double> q);
double l1(std::span<const double> p, std::span<const double> q);
double l2(std::span<const double> p, std::span<const double> q);
/// 1 - cos(p, q). Defined as 1 when either vector is zero.
double cosine_dist(std::span<const double> p, std::span<const double> q);

double distance(MetricKind m, std::span<const double> p, std::span<const double> q);

/// Row-major queries.size() x refs.size() matrix. Rows are computed in
/// parallel; each entry is a single scalar evaluation, so the result does not
/// depend on the thread count.
struct DistanceMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

DistanceMatrix distance_matrix(const std::vector<FeatureVector>& queries, const std::vector<FeatureVector>& refs,
                               MetricKind m);

}  // namespace kpath
