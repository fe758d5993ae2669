#include "kpath/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>

#include "kpath/image_io.hpp"
#include "kpath/parallel.hpp"
#include "kpath/rng.hpp"

namespace fs = std::filesystem;

namespace kpath {

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(images.size());
    for (const auto& im : images) out.push_back(im.class_label);
    return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (const auto& im : images) ++counts.at(static_cast<std::size_t>(im.class_label));
    return counts;
}

std::string class_from_filename(const std::string& stem) {
    const auto underscore = stem.find('_');
    if (underscore != std::string::npos) return stem.substr(0, underscore);
    std::size_t n = 0;
    while (n < stem.size() && !std::isdigit(static_cast<unsigned char>(stem[n]))) ++n;
    if (n == stem.size()) return {};  // no index part
    return stem.substr(0, n);
}

GrayImage to_grayscale(const GrayImage& r, const GrayImage& g, const GrayImage& b) {
    if (r.width() != g.width() || r.width() != b.width() || r.height() != g.height() ||
        r.height() != b.height())
        throw std::invalid_argument("to_grayscale: channel shapes differ");
    GrayImage out(r.width(), r.height());
    const auto& rp = r.pixels();
    const auto& gp = g.pixels();
    const auto& bp = b.pixels();
    for (std::size_t i = 0; i < rp.size(); ++i) {
        const double y = 0.299 * rp[i] + 0.587 * gp[i] + 0.114 * bp[i];
        out.pixels()[i] = static_cast<std::uint8_t>(std::clamp(std::floor(y + 0.5), 0.0, 255.0));
    }
    return out;
}

namespace {

bool is_image_file(const fs::path& p, bool tif_only) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".tif" || ext == ".tiff") return true;
    return !tif_only && ext == ".png";
}

struct Entry {
    fs::path path;
    std::string relative;
    std::string class_name;
};

}  // namespace

Dataset load_dataset(const fs::path& root, const LoadOptions& options) {
    if (!fs::is_directory(root)) throw std::runtime_error("dataset root is not a directory: " + root.string());

    std::vector<Entry> entries;
    for (const auto& de : fs::directory_iterator(root)) {
        if (de.is_regular_file() && is_image_file(de.path(), options.strict_path960)) {
            const std::string stem = de.path().stem().string();
            std::string cls = class_from_filename(stem);
            if (cls.empty()) throw std::runtime_error("cannot infer class from file name: " + de.path().string());
            entries.push_back({de.path(), de.path().filename().string(), cls});
        } else if (de.is_directory()) {
            for (const auto& sub : fs::directory_iterator(de.path())) {
                if (sub.is_regular_file() && is_image_file(sub.path(), options.strict_path960))
                    entries.push_back({sub.path(),
                                       de.path().filename().string() + "/" + sub.path().filename().string(),
                                       de.path().filename().string()});
            }
        }
    }
    if (entries.empty()) throw std::runtime_error("no images found in " + root.string());
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.relative < b.relative; });

    std::map<std::string, int> class_index;
    for (const auto& e : entries) class_index.emplace(e.class_name, 0);
    Dataset ds;
    for (auto& [name, idx] : class_index) {
        idx = static_cast<int>(ds.class_names.size());
        ds.class_names.push_back(name);
    }

    ds.images.resize(entries.size());
    parallel_for(entries.size(), [&](std::size_t i) {
        const auto& e = entries[i];
        RgbImage rgb = read_rgb(e.path);
        GrayImage gray = to_grayscale(rgb.r, rgb.g, rgb.b);
        if (gray.width() < 3 || gray.height() < 3)
            throw std::runtime_error("image smaller than 3x3: " + e.path.string());
        ds.images[i] = LabeledImage{e.path.stem().string(), class_index.at(e.class_name), std::move(gray)};
    });

    if (options.strict_path960) {
        if (ds.num_classes() != kPath960Classes)
            throw ValidationError("expected " + std::to_string(kPath960Classes) + " classes, found " +
                                  std::to_string(ds.num_classes()));
        const auto counts = ds.class_counts();
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] != kPath960PerClass)
                throw ValidationError("class " + ds.class_names[c] + " has " + std::to_string(counts[c]) +
                                      " images, expected " + std::to_string(kPath960PerClass));
    }
    return ds;
}

namespace {

std::string class_name_for(int c) {
    if (c < 26) return std::string(1, static_cast<char>('A' + c));
    return "C" + std::to_string(c);
}

std::string image_id(int c, int i, int per_class) {
    const int width = per_class >= 100 ? 3 : 2;
    std::string idx = std::to_string(i + 1);
    if (static_cast<int>(idx.size()) < width) idx.insert(0, static_cast<std::size_t>(width) - idx.size(), '0');
    return class_name_for(c) + "_" + idx;
}

struct Grating {
    double orientation;  // radians
    double frequency;    // cycles per pixel
    double amplitude;
};

struct TextureFamily {
    Grating a, b;
    double noise_sigma;
};

// Class families are fixed by class index alone so a corpus keeps its class
// structure across seeds; only per-image variation follows the seed.
TextureFamily family_for(int c, int n_classes) {
    Rng rng = make_rng(0x4b50415448ULL, "synthetic-family", static_cast<std::uint64_t>(c));
    constexpr double pi = std::numbers::pi;
    TextureFamily f{};
    f.a.orientation = pi * (static_cast<double>(c) + 0.5 * uniform_real(rng)) / n_classes;
    f.a.frequency = 0.06 + 0.22 * uniform_real(rng);
    f.a.amplitude = 35.0 + 20.0 * uniform_real(rng);
    f.b.orientation = f.a.orientation + pi / 4 + pi / 2 * uniform_real(rng);
    f.b.frequency = 0.06 + 0.22 * uniform_real(rng);
    f.b.amplitude = 15.0 + 25.0 * uniform_real(rng);
    f.noise_sigma = 20.0 + 20.0 * uniform_real(rng);
    return f;
}

double gaussian(Rng& rng) {
    // Box-Muller; u1 in (0, 1]
    const double u1 = 1.0 - uniform_real(rng);
    const double u2 = uniform_real(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

GrayImage render(const TextureFamily& f, int width, int height, Rng& rng) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    // Wide per-image jitter keeps classes overlapping enough that coarse
    // neighborhoods (small p) lose accuracy against finer ones.
    const double jitter_a = (uniform_real(rng) - 0.5) * 1.0;
    const double jitter_b = (uniform_real(rng) - 0.5) * 1.0;
    const double freq_a = f.a.frequency * (1.0 + (uniform_real(rng) - 0.5) * 0.5);
    const double freq_b = f.b.frequency * (1.0 + (uniform_real(rng) - 0.5) * 0.5);
    const double phase_a = two_pi * uniform_real(rng);
    const double phase_b = two_pi * uniform_real(rng);
    const double contrast = 0.8 + 0.4 * uniform_real(rng);
    const double brightness = 110.0 + 40.0 * uniform_real(rng);
    const double ca = std::cos(f.a.orientation + jitter_a), sa = std::sin(f.a.orientation + jitter_a);
    const double cb = std::cos(f.b.orientation + jitter_b), sb = std::sin(f.b.orientation + jitter_b);
    GrayImage img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double ta = two_pi * freq_a * (x * ca + y * sa) + phase_a;
            const double tb = two_pi * freq_b * (x * cb + y * sb) + phase_b;
            double v = brightness +
                       contrast * (f.a.amplitude * std::sin(ta) + f.b.amplitude * std::sin(tb)) +
                       f.noise_sigma * gaussian(rng);
            img(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
        }
    }
    return img;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_classes < 2) throw std::invalid_argument("generate_synthetic: need at least 2 classes");
    if (spec.per_class < 2) throw std::invalid_argument("generate_synthetic: need at least 2 images per class");
    if (spec.width < 3 || spec.height < 3) throw std::invalid_argument("generate_synthetic: images must be at least 3x3");
    Dataset ds;
    for (int c = 0; c < spec.n_classes; ++c) ds.class_names.push_back(class_name_for(c));
    const std::size_t total = static_cast<std::size_t>(spec.n_classes) * static_cast<std::size_t>(spec.per_class);
    ds.images.resize(total);
    parallel_for(total, [&](std::size_t idx) {
        const int c = static_cast<int>(idx) / spec.per_class;
        const int i = static_cast<int>(idx) % spec.per_class;
        Rng rng = make_rng(spec.seed, "synthetic-image", idx);
        ds.images[idx] = LabeledImage{image_id(c, i, spec.per_class), c,
                                      render(family_for(c, spec.n_classes), spec.width, spec.height, rng)};
    });
    return ds;
}

Dataset generate_replicated(int n_classes, int per_class, int width, int height, std::uint64_t seed) {
    if (n_classes < 1 || per_class < 1) throw std::invalid_argument("generate_replicated: empty corpus");
    Dataset ds;
    for (int c = 0; c < n_classes; ++c) {
        ds.class_names.push_back(class_name_for(c));
        Rng rng = make_rng(seed, "replicated-image", static_cast<std::uint64_t>(c));
        const GrayImage img = render(family_for(c, n_classes), width, height, rng);
        for (int i = 0; i < per_class; ++i) ds.images.push_back({image_id(c, i, per_class), c, img});
    }
    return ds;
}

void write_dataset_png(const Dataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& im : ds.images) write_png(dir / (im.id + ".png"), im.pixels);
}

}  // namespace kpath
