#include "kpath/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "kpath/parallel.hpp"

namespace kpath {

MetricKind parse_metric(std::string_view name) {
    if (name == "l1") return MetricKind::L1;
    if (name == "l2") return MetricKind::L2;
    if (name == "chi2") return MetricKind::Chi2;
    if (name == "chi2abs") return MetricKind::Chi2Abs;
    if (name == "cosine") return MetricKind::Cosine;
    throw std::invalid_argument("unknown metric '" + std::string(name) + "' (expected l1|l2|chi2|chi2abs|cosine)");
}

std::string_view metric_name(MetricKind m) noexcept {
    switch (m) {
        case MetricKind::L1: return "l1";
        case MetricKind::L2: return "l2";
        case MetricKind::Chi2: return "chi2";
        case MetricKind::Chi2Abs: return "chi2abs";
        case MetricKind::Cosine: return "cosine";
    }
    return "?";
}

namespace {
void check_lengths(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw std::invalid_argument("metric: length mismatch (" + std::to_string(p.size()) + " vs " +
                                    std::to_string(q.size()) + ")");
}
}  // namespace

double chi2(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double den = p[i] + q[i];
        if (den == 0.0) continue;
        const double d = p[i] - q[i];
        sum += d * d / den;
    }
    return 0.5 * sum;
}

double chi2_abs(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = std::abs(p[i]), b = std::abs(q[i]);
        const double den = a + b;
        if (den == 0.0) continue;
        const double d = a - b;
        sum += d * d / den;
    }
    return 0.5 * sum;
}

double l1(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return sum;
}

double l2(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - q[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double cosine_dist(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double dot = 0.0, np = 0.0, nq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        dot += p[i] * q[i];
        np += p[i] * p[i];
        nq += q[i] * q[i];
    }
    if (np == 0.0 || nq == 0.0) return 1.0;
    return 1.0 - dot / (std::sqrt(np) * std::sqrt(nq));
}

double distance(MetricKind m, std::span<const double> p, std::span<const double> q) {
    switch (m) {
        case MetricKind::L1: return l1(p, q);
        case MetricKind::L2: return l2(p, q);
        case MetricKind::Chi2: return chi2(p, q);
        case MetricKind::Chi2Abs: return chi2_abs(p, q);
        case MetricKind::Cosine: return cosine_dist(p, q);
    }
    throw std::invalid_argument("metric: unknown kind");
}

DistanceMatrix distance_matrix(const std::vector<FeatureVector>& queries, const std::vector<FeatureVector>& refs,
                               MetricKind m) {
    DistanceMatrix out{queries.size(), refs.size(), std::vector<double>(queries.size() * refs.size())};
    if (out.values.empty()) return out;
    const std::size_t dim = queries.front().size();
    for (const auto& v : queries)
        if (v.size() != dim) throw std::invalid_argument("distance_matrix: ragged query vectors");
    for (const auto& v : refs)
        if (v.size() != dim) throw std::invalid_argument("distance_matrix: reference length differs from queries");
    parallel_for(queries.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < refs.size(); ++j) out.values[i * out.cols + j] = distance(m, queries[i], refs[j]);
    });
    return out;
}

}  // namespace kpath
