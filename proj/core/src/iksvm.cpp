#include "kpath/iksvm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "kpath/binary_io.hpp"
#include "kpath/parallel.hpp"
#include "kpath/rng.hpp"

namespace kpath {

double hik(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("hik: length mismatch (" + std::to_string(u.size()) + " vs " +
                                    std::to_string(v.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < 0.0 || v[i] < 0.0) throw std::invalid_argument("hik: negative histogram entry at bin " + std::to_string(i));
        s += std::min(u[i], v[i]);
    }
    return s;
}

std::vector<double> hik_gram(const std::vector<FeatureVector>& X) {
    const std::size_t n = X.size();
    std::vector<double> K(n * n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) K[i * n + j] = hik(X[i], X[j]);
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) K[i * n + j] = K[j * n + i];
    return K;
}

// ---------------------------------------------------------------------------
// SMO

namespace {
constexpr double kTau = 1e-12;
constexpr double kSupportThreshold = 1e-12;
}  // namespace

double dual_objective(std::span<const double> gram, std::span<const int> y, std::span<const double> alpha) {
    const std::size_t n = y.size();
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += alpha[i];
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += alpha[j] * y[j] * gram[i * n + j];
        quad += alpha[i] * y[i] * row;
    }
    return linear - 0.5 * quad;
}

DualSolution solve_dual(std::span<const double> gram, std::span<const int> y, double C, const SvmOptions& options) {
    const std::size_t n = y.size();
    if (gram.size() != n * n) throw std::invalid_argument("svm: kernel matrix is not n x n");
    if (!(C > 0.0)) throw std::invalid_argument("svm: C must be positive");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw std::invalid_argument("svm: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("svm: training data must contain both classes");

    auto K = [&](std::size_t i, std::size_t j) { return gram[i * n + j]; };
    auto is_upper = [&](double a) { return a >= C; };
    auto is_lower = [&](double a) { return a <= 0.0; };

    DualSolution sol;
    sol.alpha.assign(n, 0.0);
    std::vector<double>& alpha = sol.alpha;
    // G = Q alpha - e
    std::vector<double> G(n, -1.0);

    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * G[t];
            const bool up = y[t] == 1 ? !is_upper(alpha[t]) : !is_lower(alpha[t]);
            const bool low = y[t] == 1 ? !is_lower(alpha[t]) : !is_upper(alpha[t]);
            if (up && v > gmax) {
                gmax = v;
                i = t;
            }
            if (low && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        sol.violation = (i == n || j == n) ? 0.0 : gmax - gmin;
        if (i == n || j == n || sol.violation < options.tolerance) break;
        if (sol.iterations >= options.max_iterations)
            throw ConvergenceError("svm: no convergence after " + std::to_string(options.max_iterations) +
                                       " iterations (KKT violation " + std::to_string(sol.violation) + ")",
                                   sol.violation);
        ++sol.iterations;

        const double Qij = y[i] * y[j] * K(i, j);
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = K(i, i) + K(j, j) + 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = K(i, i) + K(j, j) - 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            G[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yG = y[t] * G[t];
        if (is_upper(alpha[t])) {
            if (y[t] == -1) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else if (is_lower(alpha[t])) {
            if (y[t] == 1) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else {
            ++free_count;
            free_sum += yG;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
    sol.bias = -rho;
    return sol;
}

double BinarySvmModel::decision(std::span<const double> x) const {
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) f += dual_coefs[i] * hik(support_vectors[i], x);
    return f;
}

namespace {

BinarySvmModel model_from_solution(const std::vector<FeatureVector>& X, std::span<const std::size_t> rows,
                                   std::span<const int> y, const DualSolution& sol, double C) {
    BinarySvmModel m;
    m.C = C;
    m.bias = sol.bias;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (sol.alpha[t] > kSupportThreshold) {
            m.support_vectors.push_back(X[rows[t]]);
            m.dual_coefs.push_back(sol.alpha[t] * y[t]);
        }
    }
    return m;
}

std::vector<double> sub_gram(std::span<const double> gram, std::size_t n, std::span<const std::size_t> rows) {
    std::vector<double> out(rows.size() * rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < rows.size(); ++b) out[a * rows.size() + b] = gram[rows[a] * n + rows[b]];
    return out;
}

}  // namespace

BinarySvmModel train_binary(const std::vector<FeatureVector>& X, const std::vector<int>& y, double C,
                            const SvmOptions& options) {
    if (X.size() != y.size()) throw std::invalid_argument("svm: X and y differ in length");
    const auto gram = hik_gram(X);
    const auto sol = solve_dual(gram, y, C, options);
    std::vector<std::size_t> rows(X.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return model_from_solution(X, rows, y, sol, C);
}

MulticlassModel train_multiclass(const std::vector<FeatureVector>& X, const std::vector<int>& labels,
                                 std::span<const double> gram, double C, const SvmOptions& options) {
    if (X.size() != labels.size()) throw std::invalid_argument("svm: X and labels differ in length");
    if (X.empty()) throw std::invalid_argument("svm: empty training set");
    const std::size_t n = X.size();
    if (gram.size() != n * n) throw std::invalid_argument("svm: kernel matrix does not match X");
    MulticlassModel model;
    model.dim = X.front().size();
    for (const auto& x : X)
        if (x.size() != model.dim) throw std::invalid_argument("svm: ragged training vectors");
    const std::set<int> distinct(labels.begin(), labels.end());
    model.classes.assign(distinct.begin(), distinct.end());
    if (model.classes.size() < 2) throw std::invalid_argument("svm: need at least two classes");

    for (std::size_t a = 0; a < model.classes.size(); ++a)
        for (std::size_t b = a + 1; b < model.classes.size(); ++b)
            model.pairs.push_back({model.classes[a], model.classes[b], {}});

    parallel_for(model.pairs.size(), [&](std::size_t p) {
        auto& pair = model.pairs[p];
        std::vector<std::size_t> rows;
        std::vector<int> y;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] == pair.positive) {
                rows.push_back(i);
                y.push_back(1);
            } else if (labels[i] == pair.negative) {
                rows.push_back(i);
                y.push_back(-1);
            }
        }
        const auto sol = solve_dual(sub_gram(gram, n, rows), y, C, options);
        pair.model = model_from_solution(X, rows, y, sol, C);
    });
    return model;
}

MulticlassModel train_multiclass(const std::vector<FeatureVector>& X, const std::vector<int>& labels, double C,
                                 const SvmOptions& options) {
    return train_multiclass(X, labels, hik_gram(X), C, options);
}

Prediction predict_votes(const MulticlassModel& model, std::span<const double> x) {
    if (x.size() != model.dim)
        throw std::invalid_argument("svm: input dimension " + std::to_string(x.size()) + " differs from model " +
                                    std::to_string(model.dim));
    Prediction pred;
    pred.votes.assign(model.classes.size(), 0);
    pred.decision_strength.assign(model.classes.size(), 0.0);
    auto slot = [&](int label) {
        return static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), label) -
                                        model.classes.begin());
    };
    for (const auto& pair : model.pairs) {
        const double f = pair.model.decision(x);
        const std::size_t winner = slot(f >= 0.0 ? pair.positive : pair.negative);
        ++pred.votes[winner];
        pred.decision_strength[winner] += std::abs(f);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < model.classes.size(); ++c) {
        if (pred.votes[c] > pred.votes[best] ||
            (pred.votes[c] == pred.votes[best] && pred.decision_strength[c] > pred.decision_strength[best]))
            best = c;
    }
    pred.label = model.classes[best];
    return pred;
}

int predict(const MulticlassModel& model, std::span<const double> x) { return predict_votes(model, x).label; }

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cv: need at least 2 folds");
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    std::vector<int> fold(labels.size(), 0);
    for (auto& [label, idx] : members) {
        if (static_cast<int>(idx.size()) < folds)
            throw std::invalid_argument("cv: class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                                        " members, fewer than " + std::to_string(folds) + " folds");
        Rng rng = make_rng(seed, "cv-split", static_cast<std::uint64_t>(static_cast<std::uint32_t>(label)));
        shuffle(idx, rng);
        for (std::size_t t = 0; t < idx.size(); ++t) fold[idx[t]] = static_cast<int>(t % static_cast<std::size_t>(folds));
    }
    return fold;
}

CSelection select_c(const std::vector<FeatureVector>& X, const std::vector<int>& labels,
                    const std::vector<double>& grid, int folds, std::uint64_t seed, const SvmOptions& options) {
    if (grid.empty()) throw std::invalid_argument("select_c: empty C grid");
    if (X.size() != labels.size()) throw std::invalid_argument("select_c: X and labels differ in length");
    CSelection out;
    out.grid = grid;
    if (grid.size() == 1) {
        out.best_c = grid.front();
        out.mean_accuracy.assign(1, std::numeric_limits<double>::quiet_NaN());
        return out;
    }
    const auto fold = stratified_folds(labels, folds, seed);
    const auto gram = hik_gram(X);
    const std::size_t n = X.size();
    out.mean_accuracy.assign(grid.size(), 0.0);

    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
        std::vector<FeatureVector> Xtr;
        std::vector<int> ytr;
        for (std::size_t i : train) {
            Xtr.push_back(X[i]);
            ytr.push_back(labels[i]);
        }
        const auto gtr = sub_gram(gram, n, train);
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const auto model = train_multiclass(Xtr, ytr, gtr, grid[c], options);
            std::size_t correct = 0;
            for (std::size_t i : test)
                if (predict(model, X[i]) == labels[i]) ++correct;
            out.mean_accuracy[c] += static_cast<double>(correct) / static_cast<double>(test.size());
        }
    }
    for (double& a : out.mean_accuracy) a /= folds;

    // Smallest C among those with the highest mean accuracy.
    std::size_t best = 0;
    for (std::size_t c = 1; c < grid.size(); ++c) {
        if (out.mean_accuracy[c] > out.mean_accuracy[best] ||
            (out.mean_accuracy[c] == out.mean_accuracy[best] && grid[c] < grid[best]))
            best = c;
    }
    out.best_c = grid[best];
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr std::string_view kModelMagic = "KPSV";
constexpr std::uint16_t kModelVersion = 1;
}  // namespace

void save_model(const std::filesystem::path& path, const MulticlassModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write model: " + path.string());
    LeWriter w(os);
    w.magic(kModelMagic);
    w.put(kModelVersion);
    w.put(static_cast<std::uint32_t>(model.dim));
    w.put(static_cast<std::uint32_t>(model.classes.size()));
    for (int c : model.classes) w.put(static_cast<std::int32_t>(c));
    w.put(static_cast<std::uint32_t>(model.pairs.size()));
    for (const auto& p : model.pairs) {
        w.put(static_cast<std::int32_t>(p.positive));
        w.put(static_cast<std::int32_t>(p.negative));
        w.put(p.model.C);
        w.put(p.model.bias);
        w.put(static_cast<std::uint32_t>(p.model.support_vectors.size()));
        for (std::size_t s = 0; s < p.model.support_vectors.size(); ++s) {
            w.put(p.model.dual_coefs[s]);
            for (double v : p.model.support_vectors[s]) w.put(v);
        }
    }
    if (!os) throw std::runtime_error("error writing model: " + path.string());
}

MulticlassModel load_model(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path.string());
    LeReader r(bytes);
    r.expect_magic(kModelMagic);
    const auto version_at = r.offset();
    const auto version = r.get<std::uint16_t>("version");
    if (version != kModelVersion) throw ParseError("unsupported model version " + std::to_string(version), version_at);
    MulticlassModel m;
    m.dim = r.get<std::uint32_t>("dim");
    const auto n_classes = r.get<std::uint32_t>("class count");
    r.need(static_cast<std::size_t>(n_classes) * 4, "classes");
    for (std::uint32_t c = 0; c < n_classes; ++c) m.classes.push_back(r.get<std::int32_t>("class"));
    if (!std::is_sorted(m.classes.begin(), m.classes.end())) throw ParseError("classes not sorted", r.offset());
    const auto n_pairs = r.get<std::uint32_t>("pair count");
    for (std::uint32_t p = 0; p < n_pairs; ++p) {
        MulticlassModel::Pair pair;
        pair.positive = r.get<std::int32_t>("positive class");
        pair.negative = r.get<std::int32_t>("negative class");
        pair.model.C = r.get<double>("C");
        pair.model.bias = r.get<double>("bias");
        const auto n_sv = r.get<std::uint32_t>("support vector count");
        r.need(static_cast<std::size_t>(n_sv) * (m.dim + 1) * sizeof(double), "support vectors");
        for (std::uint32_t s = 0; s < n_sv; ++s) {
            pair.model.dual_coefs.push_back(r.get<double>("dual coefficient"));
            FeatureVector v(m.dim);
            for (double& x : v) x = r.get<double>("support vector value");
            pair.model.support_vectors.push_back(std::move(v));
        }
        m.pairs.push_back(std::move(pair));
    }
    if (r.remaining() != 0) throw ParseError("trailing bytes after model", r.offset());
    return m;
}

}  // namespace kpath
