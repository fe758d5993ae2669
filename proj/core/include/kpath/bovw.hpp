#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kpath/image.hpp"
#include "kpath/kmeans.hpp"
#include "kpath/lbp.hpp"
#include "kpath/metrics.hpp"

namespace kpath {

/// Square blocks of side `block` placed every `stride` pixels in both axes.
struct GridStrategy {
    int block = 16;
    int stride = 16;

    void validate() const;
    /// "16_8" style name (block_stride).
    std::string name() const;
    /// Parses "16_8" or "16x8".
    static GridStrategy parse(std::string_view text);

    friend bool operator==(const GridStrategy&, const GridStrategy&) = default;
};

struct Block {
    int x = 0, y = 0;  // origin in the source image
    GrayImage pixels;
};

/// Uniform LBP with 8 neighbors at radius 1, L1-normalized (59 bins).
inline constexpr LbpConfig kBlockDescriptorConfig{8, 1, true, true};
inline constexpr std::size_t kBlockDescriptorSize = 59;

/// Bilinear resampling to dim x dim with pixel-center alignment; rounding half-up.
GrayImage resize(const GrayImage& img, int dim);

/// Blocks at (i*stride, j*stride) that fit entirely inside the image, row-major.
std::vector<Block> grid_blocks(const GrayImage& img, const GridStrategy& grid);

FeatureVector block_descriptor(const GrayImage& block);

/// Mean gradient magnitude: central differences inside, one-sided at borders.
double block_gradient(const GrayImage& block);

/// Descriptors and gradients of every grid block of an image after resizing.
struct BlockFeatures {
    std::vector<FeatureVector> descriptors;
    std::vector<double> gradients;
};

/// Same values as block_descriptor/block_gradient over grid_blocks(resize(img, dim)),
/// computed from one shared LBP bin map.
BlockFeatures extract_block_features(const GrayImage& img, const GridStrategy& grid, int dim);

struct Codebook {
    std::vector<FeatureVector> centroids;
    std::uint64_t seed = 0;
    LbpConfig descriptor_config = kBlockDescriptorConfig;

    std::size_t k() const noexcept { return centroids.size(); }
    std::size_t dim() const noexcept { return centroids.empty() ? 0 : centroids.front().size(); }
};

/// k-means codebook. Initial centroids are k distinct descriptors drawn
/// uniformly (seeded) from those whose gradient exceeds the mean gradient,
/// or from all descriptors if fewer than k qualify. If trace is given it
/// receives the full Lloyd result.
Codebook build_codebook(const std::vector<FeatureVector>& descriptors, const std::vector<double>& gradients,
                        std::size_t k, std::uint64_t seed, const KMeansOptions& options = {},
                        KMeansResult* trace = nullptr);

struct BovwHistogram {
    std::vector<double> bins;
    bool normalized = true;
};

/// Word counts of precomputed block descriptors. Each descriptor goes to its
/// nearest centroid (squared L2, ties to the lowest index).
BovwHistogram encode_descriptors(const std::vector<FeatureVector>& descriptors, const Codebook& cb,
                                 bool normalize = true);

/// resize -> grid_blocks -> block_descriptor -> hard assignment -> histogram.
BovwHistogram encode(const GrayImage& img, const Codebook& cb, const GridStrategy& grid, int dim,
                     bool normalize = true);

/// Binary codebook file: "KPCB", u16 version, u32 k, u32 dim, u64 seed,
/// then k*dim little-endian f64 values.
void save_codebook(const std::filesystem::path& path, const Codebook& cb);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace kpath
