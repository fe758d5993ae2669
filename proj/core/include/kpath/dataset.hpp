#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpath/image.hpp"

namespace kpath {

/// Thrown when a load violates a structural requirement (strict Path960 shape).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LabeledImage {
    std::string id;       // source filename stem, or a generated id
    int class_label = 0;  // index into Dataset::class_names
    GrayImage pixels;
};

struct Dataset {
    std::vector<LabeledImage> images;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return images.size(); }
    std::size_t num_classes() const noexcept { return class_names.size(); }
    std::vector<int> labels() const;
    /// Number of images per class, indexed by class label.
    std::vector<std::size_t> class_counts() const;
};

inline constexpr int kPath960Classes = 20;
inline constexpr int kPath960PerClass = 48;
inline constexpr int kPath960Images = kPath960Classes * kPath960PerClass;

struct LoadOptions {
    /// Only TIF files; exactly 20 classes of 48 images each.
    bool strict_path960 = false;
};

/// Loads every image below root. Class membership comes from the file name
/// (`<class>_<index>.tif`, or a letter prefix such as `A12.tif`) or, when the
/// root holds subdirectories, from the subdirectory name. Images are ordered
/// by their path relative to root; class labels index the sorted class names.
Dataset load_dataset(const std::filesystem::path& root, const LoadOptions& options = {});

/// Class name encoded in a file name: text before the first '_', otherwise the
/// leading non-digit prefix. Empty if neither yields a name.
std::string class_from_filename(const std::string& stem);

/// BT.601 luma, rounded half-up and clamped to [0, 255].
GrayImage to_grayscale(const GrayImage& r, const GrayImage& g, const GrayImage& b);

struct SyntheticSpec {
    int n_classes = 2;
    int per_class = 2;
    int width = 64;
    int height = 64;
    std::uint64_t seed = 42;
};

/// Procedural texture corpus: each class is a family of two superimposed
/// oriented gratings with class-specific frequencies and orientations; each
/// image draws its own phases, orientation and frequency jitter, contrast,
/// brightness and Gaussian noise from the seed. Byte-for-byte reproducible for fixed parameters.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Dataset whose classes are copies of one fixed textured image each
/// (every image in a class is identical, classes differ).
Dataset generate_replicated(int n_classes, int per_class, int width, int height, std::uint64_t seed);

/// Writes each image as `<dir>/<id>.png`. Creates dir if needed.
void write_dataset_png(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace kpath
