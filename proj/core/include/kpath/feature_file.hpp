#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kpath/metrics.hpp"

namespace kpath {

/// Feature vectors with their ids and class labels.
///
/// On disk this is two files:
///   body:    "KPFT", u16 version (1), u32 count, u32 dim, count*dim little-endian f32, row-major
///   sidecar: `count` text lines "id,class_label"
/// The sidecar is looked up as `<body>.labels`, then `<body stem>.labels`.
struct FeatureSet {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<FeatureVector> vectors;
    /// Label names when the sidecar used non-integer labels (index = label).
    std::vector<std::string> label_names;

    std::size_t count() const noexcept { return vectors.size(); }
    std::size_t dim() const noexcept { return vectors.empty() ? 0 : vectors.front().size(); }
};

inline constexpr std::uint16_t kFeatureFileVersion = 1;

/// Body only. Values are stored as f32. Throws ParseError (with byte offset).
std::vector<FeatureVector> read_feature_body(const std::filesystem::path& path);

std::filesystem::path default_labels_path(const std::filesystem::path& body);

/// Reads body and sidecar. Throws ParseError on malformed input, including
/// count mismatches and duplicate ids.
FeatureSet read_feature_set(const std::filesystem::path& body,
                            const std::optional<std::filesystem::path>& labels = std::nullopt);

/// Writes body to `path` and the sidecar to `<path>.labels`. Values are narrowed to f32.
void write_feature_set(const std::filesystem::path& path, const FeatureSet& set);

}  // namespace kpath
