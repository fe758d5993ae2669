#include "kpath/bovw.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "kpath/binary_io.hpp"
#include "kpath/rng.hpp"

namespace kpath {

void GridStrategy::validate() const {
    if (block < 3) throw std::invalid_argument("grid: block side must be >= 3");
    if (stride < 1 || stride > block) throw std::invalid_argument("grid: stride must be in [1, block]");
}

std::string GridStrategy::name() const { return std::to_string(block) + "_" + std::to_string(stride); }

GridStrategy GridStrategy::parse(std::string_view text) {
    const auto sep = text.find_first_of("_x");
    if (sep == std::string_view::npos) throw std::invalid_argument("grid: expected BLOCK_STRIDE, got '" + std::string(text) + "'");
    GridStrategy g;
    const auto a = text.substr(0, sep), b = text.substr(sep + 1);
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), g.block);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), g.stride);
    if (ra.ec != std::errc{} || rb.ec != std::errc{} || ra.ptr != a.data() + a.size() || rb.ptr != b.data() + b.size())
        throw std::invalid_argument("grid: expected BLOCK_STRIDE, got '" + std::string(text) + "'");
    g.validate();
    return g;
}

GrayImage resize(const GrayImage& img, int dim) {
    if (dim <= 0) throw std::invalid_argument("resize: target size must be positive");
    if (img.empty()) throw std::invalid_argument("resize: empty image");
    const int w = img.width(), h = img.height();
    const double sx_scale = static_cast<double>(w) / dim;
    const double sy_scale = static_cast<double>(h) / dim;
    GrayImage out(dim, dim);
    for (int y = 0; y < dim; ++y) {
        const double sy = std::clamp((y + 0.5) * sy_scale - 0.5, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - y0;
        for (int x = 0; x < dim; ++x) {
            const double sx = std::clamp((x + 0.5) * sx_scale - 0.5, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - x0;
            const double top = (1.0 - fx) * img(x0, y0) + fx * img(x1, y0);
            const double bottom = (1.0 - fx) * img(x0, y1) + fx * img(x1, y1);
            const double v = (1.0 - fy) * top + fy * bottom;
            out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
        }
    }
    return out;
}

namespace {

std::vector<std::pair<int, int>> block_origins(int width, int height, const GridStrategy& grid) {
    grid.validate();
    if (width < grid.block || height < grid.block)
        throw std::invalid_argument("grid: " + std::to_string(width) + "x" + std::to_string(height) +
                                    " image is smaller than block " + std::to_string(grid.block));
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y + grid.block <= height; y += grid.stride)
        for (int x = 0; x + grid.block <= width; x += grid.stride) out.emplace_back(x, y);
    return out;
}

}  // namespace

std::vector<Block> grid_blocks(const GrayImage& img, const GridStrategy& grid) {
    std::vector<Block> out;
    for (const auto& [x, y] : block_origins(img.width(), img.height(), grid))
        out.push_back({x, y, img.crop(x, y, grid.block, grid.block)});
    return out;
}

FeatureVector block_descriptor(const GrayImage& block) {
    return lbp_histogram(block, kBlockDescriptorConfig).bins;
}

double block_gradient(const GrayImage& block) {
    const int w = block.width(), h = block.height();
    if (w < 2 || h < 2) throw std::invalid_argument("block_gradient: block must be at least 2x2");
    auto diff = [](double lo, double hi, double span) { return (hi - lo) / span; };
    double total = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx, gy;
            if (x == 0) gx = diff(block(0, y), block(1, y), 1.0);
            else if (x == w - 1) gx = diff(block(w - 2, y), block(w - 1, y), 1.0);
            else gx = diff(block(x - 1, y), block(x + 1, y), 2.0);
            if (y == 0) gy = diff(block(x, 0), block(x, 1), 1.0);
            else if (y == h - 1) gy = diff(block(x, h - 2), block(x, h - 1), 1.0);
            else gy = diff(block(x, y - 1), block(x, y + 1), 2.0);
            total += std::sqrt(gx * gx + gy * gy);
        }
    }
    return total / (static_cast<double>(w) * static_cast<double>(h));
}

BlockFeatures extract_block_features(const GrayImage& img, const GridStrategy& grid, int dim) {
    const GrayImage resized = resize(img, dim);
    const auto origins = block_origins(resized.width(), resized.height(), grid);
    const Image<std::uint32_t> bins = lbp_bin_map(resized, kBlockDescriptorConfig);
    const double centers = static_cast<double>(grid.block - 2) * static_cast<double>(grid.block - 2);
    BlockFeatures out;
    out.descriptors.reserve(origins.size());
    out.gradients.reserve(origins.size());
    std::vector<std::uint64_t> counts(kBlockDescriptorSize);
    for (const auto& [bx, by] : origins) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int y = by + 1; y < by + grid.block - 1; ++y)
            for (int x = bx + 1; x < bx + grid.block - 1; ++x) ++counts[bins(x, y)];
        FeatureVector d(kBlockDescriptorSize);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(counts[i]) / centers;
        out.descriptors.push_back(std::move(d));
        out.gradients.push_back(block_gradient(resized.crop(bx, by, grid.block, grid.block)));
    }
    return out;
}

Codebook build_codebook(const std::vector<FeatureVector>& descriptors, const std::vector<double>& gradients,
                        std::size_t k, std::uint64_t seed, const KMeansOptions& options, KMeansResult* trace) {
    if (k == 0) throw std::invalid_argument("codebook: k must be >= 1");
    if (descriptors.size() < k)
        throw std::invalid_argument("codebook: " + std::to_string(descriptors.size()) + " descriptors for k=" +
                                    std::to_string(k));
    if (gradients.size() != descriptors.size())
        throw std::invalid_argument("codebook: gradients and descriptors differ in length");

    const double mean = std::accumulate(gradients.begin(), gradients.end(), 0.0) / static_cast<double>(gradients.size());
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < gradients.size(); ++i)
        if (gradients[i] > mean) candidates.push_back(i);
    if (candidates.size() < k) {
        candidates.resize(descriptors.size());
        std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    }

    Rng rng = make_rng(seed, "codebook-init");
    std::vector<FeatureVector> initial;
    initial.reserve(k);
    for (std::size_t pick : sample_without_replacement(candidates.size(), k, rng))
        initial.push_back(descriptors[candidates[pick]]);

    KMeansResult res = lloyd(descriptors, std::move(initial), options);
    Codebook cb;
    cb.centroids = res.centroids;
    cb.seed = seed;
    if (trace) *trace = std::move(res);
    return cb;
}

BovwHistogram encode_descriptors(const std::vector<FeatureVector>& descriptors, const Codebook& cb, bool normalize) {
    if (cb.k() == 0) throw std::invalid_argument("encode: empty codebook");
    BovwHistogram h{std::vector<double>(cb.k(), 0.0), normalize};
    for (const auto& d : descriptors) {
        if (d.size() != cb.dim()) throw std::invalid_argument("encode: descriptor dimension differs from codebook");
        h.bins[nearest_centroid(d, cb.centroids)] += 1.0;
    }
    if (normalize && !descriptors.empty()) {
        const double n = static_cast<double>(descriptors.size());
        for (double& b : h.bins) b /= n;
    }
    return h;
}

BovwHistogram encode(const GrayImage& img, const Codebook& cb, const GridStrategy& grid, int dim, bool normalize) {
    if (cb.k() == 0) throw std::invalid_argument("encode: empty codebook");
    return encode_descriptors(extract_block_features(img, grid, dim).descriptors, cb, normalize);
}

namespace {
constexpr std::string_view kCodebookMagic = "KPCB";
constexpr std::uint16_t kCodebookVersion = 1;
}  // namespace

void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write codebook: " + path.string());
    LeWriter w(os);
    w.magic(kCodebookMagic);
    w.put(kCodebookVersion);
    w.put(static_cast<std::uint32_t>(cb.k()));
    w.put(static_cast<std::uint32_t>(cb.dim()));
    w.put(cb.seed);
    for (const auto& c : cb.centroids)
        for (double v : c) w.put(v);
    if (!os) throw std::runtime_error("error writing codebook: " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path.string());
    LeReader r(bytes);
    r.expect_magic(kCodebookMagic);
    const auto version_at = r.offset();
    const auto version = r.get<std::uint16_t>("version");
    if (version != kCodebookVersion) throw ParseError("unsupported codebook version " + std::to_string(version), version_at);
    const auto k = r.get<std::uint32_t>("k");
    const auto dim = r.get<std::uint32_t>("dim");
    Codebook cb;
    cb.seed = r.get<std::uint64_t>("seed");
    r.need(static_cast<std::size_t>(k) * dim * sizeof(double), "centroids");
    cb.centroids.assign(k, FeatureVector(dim));
    for (auto& c : cb.centroids)
        for (double& v : c) v = r.get<double>("centroid value");
    if (r.remaining() != 0) throw ParseError("trailing bytes after codebook", r.offset());
    return cb;
}

}  // namespace kpath
