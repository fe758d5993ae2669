#include "kpath/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "kpath/feature_file.hpp"
#include "kpath/parallel.hpp"
#include "kpath/rng.hpp"

namespace kpath {

std::string_view protocol_name(Protocol p) noexcept {
    return p == Protocol::LooNN ? "LOO_NN" : "FOLDS20_BOVW";
}

std::string_view lbp_mode_name(LbpMode m) noexcept { return m == LbpMode::Uniform ? "uniform" : "raw"; }

std::size_t EvalReport::total() const {
    std::size_t t = 0;
    for (const auto& row : confusion)
        for (auto v : row) t += v;
    return t;
}

std::size_t EvalReport::correct() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < confusion.size(); ++i) t += confusion[i][i];
    return t;
}

namespace {

std::size_t class_count(const std::vector<int>& labels, std::size_t n_classes) {
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw std::invalid_argument("eval: negative class label");
        max_label = std::max(max_label, l);
    }
    return std::max(n_classes, static_cast<std::size_t>(max_label + 1));
}

std::vector<std::vector<std::size_t>> empty_confusion(std::size_t n) {
    return std::vector<std::vector<std::size_t>>(n, std::vector<std::size_t>(n, 0));
}

}  // namespace

EvalReport loo_nn_accuracy(const std::vector<FeatureVector>& features, const std::vector<int>& labels, MetricKind m,
                           std::size_t n_classes) {
    const std::size_t n = features.size();
    if (n < 2) throw std::invalid_argument("loo: need at least 2 items, got " + std::to_string(n));
    if (labels.size() != n) throw std::invalid_argument("loo: features and labels differ in length");
    const std::size_t dim = features.front().size();
    for (const auto& f : features)
        if (f.size() != dim) throw std::invalid_argument("loo: feature vectors differ in length");

    EvalReport rep;
    rep.protocol = Protocol::LooNN;
    rep.config.metric = std::string(metric_name(m));
    rep.config.classifier = "nn";
    rep.predictions.assign(n, -1);
    parallel_for(n, [&](std::size_t i) {
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = distance(m, features[i], features[j]);
            if (best == n || d < best_d) {
                best_d = d;
                best = j;
            }
        }
        rep.predictions[i] = labels[best];
    });
    rep.confusion = empty_confusion(class_count(labels, n_classes));
    for (std::size_t i = 0; i < n; ++i) ++rep.confusion[labels[i]][rep.predictions[i]];
    rep.accuracy = static_cast<double>(rep.correct()) / static_cast<double>(n);
    return rep;
}

FoldPlan make_fold_plan(const std::vector<int>& labels, int folds, int per_class, std::uint64_t seed) {
    if (folds < 1 || per_class < 1) throw std::invalid_argument("fold plan: folds and per_class must be positive");
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    for (const auto& [label, idx] : members)
        if (static_cast<int>(idx.size()) <= per_class)
            throw std::invalid_argument("fold plan: class " + std::to_string(label) + " has " +
                                        std::to_string(idx.size()) + " images; need more than " +
                                        std::to_string(per_class) + " so training keeps the class");
    FoldPlan plan;
    plan.seed = seed;
    for (int f = 0; f < folds; ++f) {
        Rng rng = make_rng(seed, "fold-plan", static_cast<std::uint64_t>(f));
        std::vector<std::size_t> test;
        for (const auto& [label, idx] : members)
            for (std::size_t pick : sample_without_replacement(idx.size(), static_cast<std::size_t>(per_class), rng))
                test.push_back(idx[pick]);
        std::sort(test.begin(), test.end());
        plan.test_ids.push_back(std::move(test));
    }
    return plan;
}

Classifier Classifier::parse(std::string_view name) {
    if (name == "iksvm") return Classifier{true, MetricKind::L2};
    return Classifier{false, parse_metric(name)};
}

std::string Classifier::name() const { return iksvm ? "iksvm" : std::string(metric_name(metric)); }

std::vector<EvalReport> folds20_bovw(const Dataset& ds, const BovwEvalConfig& cfg, std::uint64_t seed,
                                     std::vector<FoldTrace>* trace) {
    cfg.grid.validate();
    if (cfg.classifiers.empty()) throw std::invalid_argument("bovw: no classifiers requested");
    if (cfg.dim < cfg.grid.block) throw std::invalid_argument("bovw: resize target smaller than block");
    const auto labels = ds.labels();
    const std::size_t n = ds.size();
    const std::size_t n_classes = class_count(labels, ds.num_classes());
    const FoldPlan plan = make_fold_plan(labels, cfg.folds, cfg.test_per_class, seed);
    const std::size_t per_axis = static_cast<std::size_t>((cfg.dim - cfg.grid.block) / cfg.grid.stride + 1);
    const std::size_t blocks_per_image = per_axis * per_axis;

    std::vector<EvalReport> reports(cfg.classifiers.size());
    for (std::size_t c = 0; c < reports.size(); ++c) {
        auto& r = reports[c];
        r.protocol = Protocol::Folds20Bovw;
        r.config.metric = cfg.classifiers[c].iksvm ? "" : std::string(metric_name(cfg.classifiers[c].metric));
        r.config.classifier = cfg.classifiers[c].name();
        r.config.grid = cfg.grid.name();
        r.config.dim = cfg.dim;
        r.config.k = cfg.k;
        r.config.seed = seed;
        r.confusion = empty_confusion(n_classes);
    }
    if (trace) trace->clear();

    for (int f = 0; f < cfg.folds; ++f) {
        const auto& test = plan.test_ids[static_cast<std::size_t>(f)];
        std::vector<bool> is_test(n, false);
        for (std::size_t t : test) is_test[t] = true;
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < n; ++i)
            if (!is_test[i]) train.push_back(i);

        // Descriptor sample for k-means, drawn from training images only.
        const std::size_t total_blocks = train.size() * blocks_per_image;
        std::vector<std::size_t> picks;
        if (cfg.codebook_sample == 0 || cfg.codebook_sample >= total_blocks) {
            picks.resize(total_blocks);
            for (std::size_t i = 0; i < total_blocks; ++i) picks[i] = i;
        } else {
            Rng rng = make_rng(seed, "codebook-sample", static_cast<std::uint64_t>(f));
            picks = sample_without_replacement(total_blocks, cfg.codebook_sample, rng);
            std::sort(picks.begin(), picks.end());
        }
        std::vector<std::vector<std::size_t>> picks_by_image(train.size());
        for (std::size_t p : picks) picks_by_image[p / blocks_per_image].push_back(p % blocks_per_image);

        std::vector<BlockFeatures> sampled(train.size());
        parallel_for(train.size(), [&](std::size_t t) {
            if (picks_by_image[t].empty()) return;
            BlockFeatures all = extract_block_features(ds.images[train[t]].pixels, cfg.grid, cfg.dim);
            for (std::size_t b : picks_by_image[t]) {
                sampled[t].descriptors.push_back(std::move(all.descriptors[b]));
                sampled[t].gradients.push_back(all.gradients[b]);
            }
        });
        std::vector<FeatureVector> descriptors;
        std::vector<double> gradients;
        FoldTrace ft;
        ft.test_ids = test;
        ft.train_ids = train;
        for (std::size_t t = 0; t < train.size(); ++t) {
            if (sampled[t].descriptors.empty()) continue;
            ft.codebook_image_ids.push_back(train[t]);
            for (auto& d : sampled[t].descriptors) descriptors.push_back(std::move(d));
            gradients.insert(gradients.end(), sampled[t].gradients.begin(), sampled[t].gradients.end());
        }
        sampled.clear();
        for (std::size_t id : ft.codebook_image_ids)
            if (is_test[id]) throw std::logic_error("bovw: test image leaked into codebook construction");

        const Codebook cb = build_codebook(descriptors, gradients, cfg.k,
                                           derive_seed(seed, "codebook", static_cast<std::uint64_t>(f)), cfg.kmeans);
        descriptors.clear();
        gradients.clear();

        std::vector<FeatureVector> encoded(n);
        parallel_for(n, [&](std::size_t i) { encoded[i] = encode(ds.images[i].pixels, cb, cfg.grid, cfg.dim).bins; });

        std::vector<FeatureVector> x_train;
        std::vector<int> y_train;
        for (std::size_t i : train) {
            if (is_test[i]) throw std::logic_error("bovw: test image leaked into training set");
            x_train.push_back(encoded[i]);
            y_train.push_back(labels[i]);
        }

        for (std::size_t c = 0; c < cfg.classifiers.size(); ++c) {
            const auto& clf = cfg.classifiers[c];
            std::vector<int> predicted(test.size());
            if (clf.iksvm) {
                const CSelection sel = select_c(x_train, y_train, cfg.c_grid, cfg.cv_folds,
                                                derive_seed(seed, "cv", static_cast<std::uint64_t>(f)), cfg.svm);
                ft.selected_c = sel.best_c;
                const auto model = train_multiclass(x_train, y_train, sel.best_c, cfg.svm);
                for (std::size_t t = 0; t < test.size(); ++t) predicted[t] = predict(model, encoded[test[t]]);
            } else {
                parallel_for(test.size(), [&](std::size_t t) {
                    std::size_t best = 0;
                    double best_d = std::numeric_limits<double>::infinity();
                    for (std::size_t j = 0; j < x_train.size(); ++j) {
                        const double d = distance(clf.metric, encoded[test[t]], x_train[j]);
                        if (j == 0 || d < best_d) {
                            best_d = d;
                            best = j;
                        }
                    }
                    predicted[t] = y_train[best];
                });
            }
            std::size_t correct = 0;
            for (std::size_t t = 0; t < test.size(); ++t) {
                ++reports[c].confusion[labels[test[t]]][predicted[t]];
                if (predicted[t] == labels[test[t]]) ++correct;
            }
            reports[c].fold_accuracies.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
        }
        if (trace) trace->push_back(std::move(ft));
    }

    for (auto& r : reports) {
        double sum = 0.0;
        for (double a : r.fold_accuracies) sum += a;
        r.accuracy = sum / static_cast<double>(r.fold_accuracies.size());
    }
    return reports;
}

std::vector<FeatureVector> lbp_features(const Dataset& ds, const LbpConfig& cfg) {
    cfg.validate();
    std::vector<FeatureVector> out(ds.size());
    parallel_for(ds.size(), [&](std::size_t i) { out[i] = lbp_histogram(ds.images[i].pixels, cfg).bins; });
    return out;
}

std::vector<EvalReport> sweep_lbp(const Dataset& ds, const LbpSweepConfig& cfg) {
    std::vector<EvalReport> out;
    if (cfg.metrics.empty()) return out;
    const auto labels = ds.labels();
    for (int r : cfg.radii) {
        for (int p : cfg.neighbors) {
            for (LbpMode mode : cfg.modes) {
                const bool fallback = mode == LbpMode::Raw && p > 16;
                // the uniform pass already covers this cell
                if (fallback && std::find(cfg.modes.begin(), cfg.modes.end(), LbpMode::Uniform) != cfg.modes.end())
                    continue;
                LbpConfig lc{p, r, mode == LbpMode::Uniform || fallback, true};
                const auto features = lbp_features(ds, lc);
                for (MetricKind m : cfg.metrics) {
                    EvalReport rep = loo_nn_accuracy(features, labels, m, ds.num_classes());
                    rep.config.classifier = std::string("nn-") + (lc.uniform ? "uniform" : "raw");
                    rep.config.p = p;
                    rep.config.r = r;
                    out.push_back(std::move(rep));
                }
            }
        }
    }
    auto metric_rank = [&](const std::string& name) {
        for (std::size_t i = 0; i < cfg.metrics.size(); ++i)
            if (metric_name(cfg.metrics[i]) == name) return i;
        return cfg.metrics.size();
    };
    std::stable_sort(out.begin(), out.end(), [&](const EvalReport& a, const EvalReport& b) {
        return metric_rank(a.config.metric) < metric_rank(b.config.metric);
    });
    return out;
}

EvalReport eval_feature_file(const std::filesystem::path& path, MetricKind m,
                             const std::optional<std::filesystem::path>& labels) {
    const FeatureSet set = read_feature_set(path, labels);
    EvalReport rep = loo_nn_accuracy(set.vectors, set.labels, m);
    rep.config.classifier = "nn";
    return rep;
}

namespace {

std::string format_accuracy(double a) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", a);
    return buf;
}

std::string int_cell(long long v) { return v == 0 ? std::string() : std::to_string(v); }

void write_row(std::ostream& os, const EvalReport& r, const std::string& fold, double accuracy) {
    const auto& c = r.config;
    os << protocol_name(r.protocol) << ',' << c.metric << ',' << c.classifier << ',' << int_cell(c.p) << ','
       << int_cell(c.r) << ',' << c.grid << ',' << int_cell(c.dim) << ',' << int_cell(static_cast<long long>(c.k))
       << ',' << c.seed << ',' << fold << ',' << format_accuracy(accuracy) << '\n';
}

}  // namespace

void write_csv_header(std::ostream& os) { os << "protocol,metric,classifier,p,r,grid,dim,k,seed,fold,accuracy\n"; }

void write_csv_rows(std::ostream& os, const EvalReport& report) {
    for (std::size_t f = 0; f < report.fold_accuracies.size(); ++f)
        write_row(os, report, std::to_string(f), report.fold_accuracies[f]);
    write_row(os, report, "mean", report.accuracy);
}

void write_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
    write_csv_header(os);
    for (const auto& r : reports) write_csv_rows(os, r);
}

}  // namespace kpath
