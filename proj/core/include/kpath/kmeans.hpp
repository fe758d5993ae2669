#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kpath/metrics.hpp"

namespace kpath {

struct KMeansOptions {
    std::size_t max_iterations = 100;
    /// Stop once no centroid moves farther than this (Euclidean) in one update.
    double tolerance = 1e-4;
};

struct KMeansResult {
    std::vector<FeatureVector> centroids;
    std::vector<std::size_t> assignment;
    /// Within-cluster sum of squares after every assignment step, starting
    /// with the assignment to the initial centroids.
    std::vector<double> objective_history;
    std::size_t iterations = 0;  // centroid updates performed
    bool converged = false;
};

double squared_l2(std::span<const double> a, std::span<const double> b);

/// Index of the centroid closest in squared L2; ties go to the lowest index.
std::size_t nearest_centroid(std::span<const double> point, const std::vector<FeatureVector>& centroids);

/// Within-cluster sum of squares for a given assignment.
double wcss(const std::vector<FeatureVector>& points, const std::vector<FeatureVector>& centroids,
            const std::vector<std::size_t>& assignment);

/// Lloyd iterations from the given initial centroids. Assignment runs in
/// parallel over points; centroid sums accumulate in point order, so results
/// are identical for any thread count. A cluster that loses all its points is
/// moved onto the point farthest from its assigned centroid.
KMeansResult lloyd(const std::vector<FeatureVector>& points, std::vector<FeatureVector> initial,
                   const KMeansOptions& options = {});

}  // namespace kpath
