#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kpath/dataset.hpp"
#include "kpath/eval.hpp"
#include "kpath/feature_file.hpp"
#include "kpath/parallel.hpp"

namespace fs = std::filesystem;

namespace kpath::cli {

namespace {

/// Bad flag values or combinations noticed after CLI11 parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 42;
    unsigned threads = 0;
};

struct DatasetArgs {
    std::string root;
    bool synthetic = false;
    bool strict = false;
    int classes = 5;
    int per_class = 20;
    std::string size = "64";
};

std::pair<int, int> parse_size(const std::string& text) {
    auto to_int = [&](std::string_view s) {
        int v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || v < 3)
            throw UsageError("--size: expected N or WxH with sides >= 3, got '" + text + "'");
        return v;
    };
    const auto x = text.find('x');
    if (x == std::string::npos) {
        const int n = to_int(text);
        return {n, n};
    }
    return {to_int(std::string_view(text).substr(0, x)), to_int(std::string_view(text).substr(x + 1))};
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

/// Effective configuration as a command line that reproduces the run.
class ConfigLog {
public:
    ConfigLog(std::string sub, const Globals& g) : line_("kpath " + std::move(sub)) {
        add("seed", std::to_string(g.seed));
        add("threads", std::to_string(g.threads));
    }
    ConfigLog& add(const std::string& flag, const std::string& value) {
        line_ += " --" + flag + " " + (value.empty() ? "''" : value);
        return *this;
    }
    ConfigLog& flag(const std::string& flag, bool on) {
        if (on) line_ += " --" + flag;
        return *this;
    }
    void emit(std::ostream& err) const { err << "config: " << line_ << '\n'; }

private:
    std::string line_;
};

void add_dataset_options(CLI::App* sub, DatasetArgs& d) {
    sub->add_option("--root", d.root, "Dataset directory (class from file name prefix or subdirectory)");
    sub->add_flag("--synthetic", d.synthetic, "Use a generated texture corpus instead of --root");
    sub->add_flag("--strict-path960", d.strict, "Require 20 classes x 48 TIF images");
    sub->add_option("--classes", d.classes, "Synthetic corpus: number of classes")->check(CLI::Range(2, 10000));
    sub->add_option("--per-class", d.per_class, "Synthetic corpus: images per class")->check(CLI::Range(2, 100000));
    sub->add_option("--size", d.size, "Synthetic corpus: image size, N or WxH");
}

void log_dataset(ConfigLog& log, const DatasetArgs& d) {
    if (d.synthetic) {
        log.flag("synthetic", true).add("classes", std::to_string(d.classes));
        log.add("per-class", std::to_string(d.per_class)).add("size", d.size);
    } else {
        log.add("root", d.root).flag("strict-path960", d.strict);
    }
}

Dataset obtain_dataset(const DatasetArgs& d, const Globals& g, std::ostream& err) {
    if (d.synthetic == !d.root.empty()) throw UsageError("give exactly one of --root or --synthetic");
    Dataset ds;
    if (d.synthetic) {
        const auto [w, h] = parse_size(d.size);
        ds = generate_synthetic({d.classes, d.per_class, w, h, g.seed});
    } else {
        if (!fs::is_directory(d.root)) throw UsageError("--root: not a directory: " + d.root);
        ds = load_dataset(d.root, LoadOptions{d.strict});
    }
    err << "dataset: " << ds.size() << " images, " << ds.num_classes() << " classes\n";
    return ds;
}

/// Writes to `path`, or to `out` when path is "-".
template <typename Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
    if (path == "-") {
        fn(out);
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    fn(os);
    if (!os) throw std::runtime_error("error writing " + path);
}

std::vector<MetricKind> parse_metrics(const std::vector<std::string>& names) {
    std::vector<MetricKind> out;
    for (const auto& n : names) {
        try {
            out.push_back(parse_metric(n));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

std::vector<LbpMode> parse_modes(const std::string& mode) {
    if (mode == "uniform") return {LbpMode::Uniform};
    if (mode == "raw") return {LbpMode::Raw};
    if (mode == "both") return {LbpMode::Uniform, LbpMode::Raw};
    throw UsageError("--mode: expected uniform, raw or both, got '" + mode + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Texture classification toolkit for histopathology image patches", "kpath"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Seed for every randomized stage")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

    // validate-dataset
    DatasetArgs vd;
    auto* validate = app.add_subcommand("validate-dataset", "Load a dataset and print its class counts");
    validate->add_option("--root", vd.root, "Dataset directory")->required();
    validate->add_flag("--strict-path960", vd.strict, "Require 20 classes x 48 TIF images");

    // lbp-sweep
    DatasetArgs sd;
    std::vector<std::string> sweep_metrics{"chi2", "l2", "l1"};
    std::vector<int> radii{1, 2, 3, 4, 5};
    std::vector<int> neighbors{4, 8, 12, 16, 20, 24};
    std::string mode = "uniform";
    std::string sweep_out = "-";
    auto* sweep = app.add_subcommand("lbp-sweep", "Leave-one-out nearest neighbor over LBP (r, p, metric) grid");
    add_dataset_options(sweep, sd);
    sweep->add_option("--metrics", sweep_metrics, "l1,l2,chi2,chi2abs,cosine")->delimiter(',')->capture_default_str();
    sweep->add_option("--radii", radii, "LBP radii")->delimiter(',')->check(CLI::PositiveNumber);
    sweep->add_option("--neighbors", neighbors, "LBP neighbor counts (4..24)")->delimiter(',');
    sweep->add_option("--mode", mode, "uniform, raw or both")->capture_default_str();
    sweep->add_option("--out", sweep_out, "CSV output path, - for stdout")->capture_default_str();

    // bovw-eval
    DatasetArgs bd;
    std::vector<std::string> grids{"16_8"};
    std::vector<int> dims{256};
    std::vector<std::size_t> ks{800};
    std::vector<std::string> classifiers{"iksvm"};
    std::vector<double> c_grid = kDefaultCGrid;
    BovwEvalConfig bcfg;
    std::string bovw_out = "-";
    auto* bovw = app.add_subcommand("bovw-eval", "20-fold bag-of-visual-words evaluation");
    add_dataset_options(bovw, bd);
    bovw->add_option("--grid", grids, "Block_stride list, e.g. 16_8,32_32")->delimiter(',');
    bovw->add_option("--dim", dims, "Resize targets")->delimiter(',')->check(CLI::PositiveNumber);
    bovw->add_option("--k", ks, "Codebook sizes")->delimiter(',')->check(CLI::PositiveNumber);
    bovw->add_option("--classifiers", classifiers, "iksvm and/or metric names")->delimiter(',');
    bovw->add_option("--codebook-sample", bcfg.codebook_sample, "Training descriptors sampled for k-means, 0 = all")
        ->capture_default_str();
    bovw->add_option("--folds", bcfg.folds, "Number of folds")->check(CLI::PositiveNumber)->capture_default_str();
    bovw->add_option("--test-per-class", bcfg.test_per_class, "Test images per class per fold")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bovw->add_option("--c-grid", c_grid, "IKSVM penalty candidates")->delimiter(',')->check(CLI::PositiveNumber);
    bovw->add_option("--out", bovw_out, "CSV output path, - for stdout")->capture_default_str();

    // eval-features
    std::string feat_file, feat_labels, feat_out = "-";
    std::vector<std::string> feat_metrics{"l2"};
    auto* feats = app.add_subcommand("eval-features", "Leave-one-out nearest neighbor over a KPFT feature file");
    feats->add_option("--file", feat_file, "KPFT feature file")->required();
    feats->add_option("--labels", feat_labels, "Labels sidecar (default <file>.labels, then <stem>.labels)");
    feats->add_option("--metric", feat_metrics, "Metric list")->delimiter(',');
    feats->add_option("--out", feat_out, "CSV output path, - for stdout")->capture_default_str();

    // synth
    int synth_classes = 2, synth_per_class = 4;
    std::string synth_size = "64", synth_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic texture corpus as PNG files");
    synth->add_option("--classes", synth_classes, "Number of classes")->check(CLI::Range(2, 10000))->capture_default_str();
    synth->add_option("--per-class", synth_per_class, "Images per class")->check(CLI::Range(2, 100000))->capture_default_str();
    synth->add_option("--size", synth_size, "N or WxH")->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // export-lbp
    DatasetArgs ed;
    int export_p = 8, export_r = 1;
    std::string export_mode = "uniform", export_out;
    auto* exp = app.add_subcommand("export-lbp", "Write whole-image LBP histograms as a KPFT feature file");
    add_dataset_options(exp, ed);
    exp->add_option("--p", export_p, "Neighbors")->capture_default_str();
    exp->add_option("--r", export_r, "Radius")->capture_default_str();
    exp->add_option("--mode", export_mode, "uniform or raw")->capture_default_str();
    exp->add_option("--out", export_out, "Output .kpft path")->required();

    std::vector<char*> argv;
    std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"kpath"} : args;
    for (auto& a : storage) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        set_thread_count(g.threads);
        if (*validate) {
            ConfigLog log("validate-dataset", g);
            log.add("root", vd.root).flag("strict-path960", vd.strict).emit(err);
            if (!fs::is_directory(vd.root)) throw UsageError("--root: not a directory: " + vd.root);
            const Dataset ds = load_dataset(vd.root, LoadOptions{vd.strict});
            const auto counts = ds.class_counts();
            out << "images " << ds.size() << "\nclasses " << ds.num_classes() << '\n';
            for (std::size_t c = 0; c < counts.size(); ++c) out << ds.class_names[c] << ' ' << counts[c] << '\n';
        } else if (*sweep) {
            LbpSweepConfig cfg;
            cfg.metrics = parse_metrics(sweep_metrics);
            cfg.radii = radii;
            cfg.neighbors = neighbors;
            cfg.modes = parse_modes(mode);
            for (int p : neighbors)
                if (p < 4 || p > 24) throw UsageError("--neighbors: values must be in [4, 24]");
            ConfigLog log("lbp-sweep", g);
            log_dataset(log, sd);
            log.add("metrics", join(sweep_metrics)).add("radii", join(radii)).add("neighbors", join(neighbors));
            log.add("mode", mode).add("out", sweep_out).emit(err);
            const Dataset ds = obtain_dataset(sd, g, err);
            auto reports = sweep_lbp(ds, cfg);
            for (auto& r : reports) r.config.seed = g.seed;
            with_output(sweep_out, out, [&](std::ostream& os) { write_csv(os, reports); });
        } else if (*bovw) {
            std::vector<GridStrategy> parsed_grids;
            try {
                for (const auto& s : grids) parsed_grids.push_back(GridStrategy::parse(s));
                bcfg.classifiers.clear();
                for (const auto& c : classifiers) bcfg.classifiers.push_back(Classifier::parse(c));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            bcfg.c_grid = c_grid;
            ConfigLog log("bovw-eval", g);
            log_dataset(log, bd);
            log.add("grid", join(grids)).add("dim", join(dims)).add("k", join(ks));
            log.add("classifiers", join(classifiers)).add("codebook-sample", std::to_string(bcfg.codebook_sample));
            log.add("folds", std::to_string(bcfg.folds)).add("test-per-class", std::to_string(bcfg.test_per_class));
            log.add("c-grid", join(c_grid)).add("out", bovw_out).emit(err);
            const Dataset ds = obtain_dataset(bd, g, err);
            std::vector<EvalReport> reports;
            for (const auto& grid : parsed_grids)
                for (int dim : dims)
                    for (std::size_t k : ks) {
                        BovwEvalConfig c = bcfg;
                        c.grid = grid;
                        c.dim = dim;
                        c.k = k;
                        err << "running grid=" << grid.name() << " dim=" << dim << " k=" << k << '\n';
                        for (auto& r : folds20_bovw(ds, c, g.seed)) reports.push_back(std::move(r));
                    }
            with_output(bovw_out, out, [&](std::ostream& os) { write_csv(os, reports); });
        } else if (*feats) {
            const auto metrics = parse_metrics(feat_metrics);
            ConfigLog log("eval-features", g);
            log.add("file", feat_file);
            if (!feat_labels.empty()) log.add("labels", feat_labels);
            log.add("metric", join(feat_metrics)).add("out", feat_out).emit(err);
            if (!fs::is_regular_file(feat_file)) throw UsageError("--file: no such file: " + feat_file);
            std::optional<fs::path> labels;
            if (!feat_labels.empty()) labels = feat_labels;
            std::vector<EvalReport> reports;
            for (auto m : metrics) {
                reports.push_back(eval_feature_file(feat_file, m, labels));
                reports.back().config.seed = g.seed;
            }
            with_output(feat_out, out, [&](std::ostream& os) { write_csv(os, reports); });
        } else if (*synth) {
            ConfigLog log("synth", g);
            log.add("classes", std::to_string(synth_classes)).add("per-class", std::to_string(synth_per_class));
            log.add("size", synth_size).add("out", synth_out).emit(err);
            const auto [w, h] = parse_size(synth_size);
            const Dataset ds = generate_synthetic({synth_classes, synth_per_class, w, h, g.seed});
            write_dataset_png(ds, synth_out);
            out << "wrote " << ds.size() << " images to " << synth_out << '\n';
        } else if (*exp) {
            const auto modes = parse_modes(export_mode);
            if (modes.size() != 1) throw UsageError("--mode: export needs uniform or raw");
            const LbpConfig lc{export_p, export_r, modes[0] == LbpMode::Uniform, true};
            try {
                lc.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            ConfigLog log("export-lbp", g);
            log_dataset(log, ed);
            log.add("p", std::to_string(export_p)).add("r", std::to_string(export_r));
            log.add("mode", export_mode).add("out", export_out).emit(err);
            const Dataset ds = obtain_dataset(ed, g, err);
            FeatureSet set;
            set.vectors = lbp_features(ds, lc);
            for (const auto& im : ds.images) {
                set.ids.push_back(im.id);
                set.labels.push_back(im.class_label);
            }
            set.label_names = ds.class_names;
            write_feature_set(export_out, set);
            out << "wrote " << set.count() << " x " << set.dim() << " features to " << export_out << '\n';
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for more information.\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace kpath::cli
