#include "kpath/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kpath/parallel.hpp"

namespace kpath {

double squared_l2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t nearest_centroid(std::span<const double> point, const std::vector<FeatureVector>& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    const std::size_t dim = point.size();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double* cp = centroids[c].data();
        double s = 0.0;
        std::size_t i = 0;
        // Partial sums only grow, so once s >= best_d this centroid cannot win
        // under the strict-less tie rule.
        for (; i < dim; ++i) {
            const double d = point[i] - cp[i];
            s += d * d;
            if (s >= best_d) break;
        }
        if (i == dim && s < best_d) {
            best_d = s;
            best = c;
        }
    }
    return best;
}

double wcss(const std::vector<FeatureVector>& points, const std::vector<FeatureVector>& centroids,
            const std::vector<std::size_t>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) total += squared_l2(points[i], centroids[assignment[i]]);
    return total;
}

KMeansResult lloyd(const std::vector<FeatureVector>& points, std::vector<FeatureVector> initial,
                   const KMeansOptions& options) {
    if (initial.empty()) throw std::invalid_argument("kmeans: no initial centroids");
    if (points.size() < initial.size()) throw std::invalid_argument("kmeans: fewer points than clusters");
    const std::size_t dim = initial.front().size();
    for (const auto& c : initial)
        if (c.size() != dim) throw std::invalid_argument("kmeans: ragged centroids");
    for (const auto& p : points)
        if (p.size() != dim) throw std::invalid_argument("kmeans: point dimension differs from centroids");

    const std::size_t k = initial.size();
    KMeansResult res;
    res.centroids = std::move(initial);
    res.assignment.assign(points.size(), 0);

    auto assign = [&] {
        parallel_for(points.size(), [&](std::size_t i) { res.assignment[i] = nearest_centroid(points[i], res.centroids); });
        res.objective_history.push_back(wcss(points, res.centroids, res.assignment));
    };

    assign();
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        std::vector<FeatureVector> sums(k, FeatureVector(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            auto& s = sums[res.assignment[i]];
            for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
            ++counts[res.assignment[i]];
        }

        std::vector<std::size_t> empty;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                empty.push_back(c);
                continue;
            }
            const double n = static_cast<double>(counts[c]);
            for (double& v : sums[c]) v /= n;
        }
        if (!empty.empty()) {
            std::vector<double> spread(points.size());
            for (std::size_t i = 0; i < points.size(); ++i)
                spread[i] = squared_l2(points[i], res.centroids[res.assignment[i]]);
            std::vector<bool> taken(points.size(), false);
            for (std::size_t c : empty) {
                std::size_t far = points.size();
                for (std::size_t i = 0; i < points.size(); ++i)
                    if (!taken[i] && (far == points.size() || spread[i] > spread[far])) far = i;
                taken[far] = true;
                sums[c] = points[far];
            }
        }

        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            movement = std::max(movement, std::sqrt(squared_l2(sums[c], res.centroids[c])));
        res.centroids = std::move(sums);
        ++res.iterations;
        assign();
        if (movement < options.tolerance) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace kpath
