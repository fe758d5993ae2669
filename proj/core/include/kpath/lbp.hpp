#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kpath/image.hpp"

namespace kpath {

/// Circular LBP parameters: p neighbors sampled on a circle of radius r.
struct LbpConfig {
    int p = 8;
    int r = 1;
    bool uniform = false;    // map codes through UniformMapping
    bool normalize = false;  // L1-normalize the histogram

    /// 2^p for raw codes, p(p-1)+3 for uniform.
    std::size_t histogram_size() const;
    /// Throws std::invalid_argument unless 4 <= p <= 24, r >= 1, and raw mode has p <= 16.
    void validate() const;

    friend bool operator==(const LbpConfig&, const LbpConfig&) = default;
};

struct LbpHistogram {
    std::vector<double> bins;
    LbpConfig config;
};

/// Code -> bin table for uniform patterns (at most two circular 0/1
/// transitions). Uniform codes get bins in ascending code order; every other
/// code shares the last bin.
class UniformMapping {
public:
    explicit UniformMapping(int p);

    int p() const noexcept { return p_; }
    std::size_t bins() const noexcept { return uniform_codes_.size() + 1; }
    std::size_t nonuniform_bin() const noexcept { return uniform_codes_.size(); }
    std::uint32_t bin(std::uint32_t code) const;

    /// Full table over [0, 2^p). Allocates 2^p entries.
    std::vector<std::uint32_t> table() const;

    /// Number of circular 0/1 transitions in a p-bit code.
    static int transitions(std::uint32_t code, int p) noexcept;

private:
    int p_;
    std::vector<std::uint32_t> uniform_codes_;  // sorted
    std::vector<std::uint16_t> direct_;         // filled for p <= 16
};

/// Intensity of neighbor k around (cx, cy): the point
/// (cx - r sin(2 pi k / p), cy + r cos(2 pi k / p)), bilinearly interpolated.
/// Offsets within 1e-6 of an integer snap to it, so axis-aligned samples read
/// pixels exactly. Throws std::out_of_range if the circle leaves the image.
template <typename T>
double sample_neighbor(const Image<T>& img, int cx, int cy, int k, const LbpConfig& cfg);

/// Bit k is set iff neighbor k >= center (within 1e-9, so rounding cannot
/// break exact ties); bit 0 is least significant.
template <typename T>
std::uint32_t lbp_code(const Image<T>& img, int cx, int cy, const LbpConfig& cfg);

/// Per-pixel bin indices (uniform-mapped when cfg.uniform). Only centers with
/// r <= x < width - r and r <= y < height - r are valid; border entries are 0.
template <typename T>
Image<std::uint32_t> lbp_bin_map(const Image<T>& img, const LbpConfig& cfg);

/// Histogram over all valid centers. Throws std::invalid_argument if the image
/// has no valid center (width or height <= 2r).
template <typename T>
LbpHistogram lbp_histogram(const Image<T>& img, const LbpConfig& cfg);

extern template double sample_neighbor(const GrayImage&, int, int, int, const LbpConfig&);
extern template double sample_neighbor(const RealImage&, int, int, int, const LbpConfig&);
extern template std::uint32_t lbp_code(const GrayImage&, int, int, const LbpConfig&);
extern template std::uint32_t lbp_code(const RealImage&, int, int, const LbpConfig&);
extern template Image<std::uint32_t> lbp_bin_map(const GrayImage&, const LbpConfig&);
extern template Image<std::uint32_t> lbp_bin_map(const RealImage&, const LbpConfig&);
extern template LbpHistogram lbp_histogram(const GrayImage&, const LbpConfig&);
extern template LbpHistogram lbp_histogram(const RealImage&, const LbpConfig&);

}  // namespace kpath
