#include "kpath/lbp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kpath {

std::size_t LbpConfig::histogram_size() const {
    return uniform ? static_cast<std::size_t>(p) * static_cast<std::size_t>(p - 1) + 3
                   : std::size_t{1} << p;
}

void LbpConfig::validate() const {
    if (p < 4 || p > 24) throw std::invalid_argument("LBP: p must be in [4, 24], got " + std::to_string(p));
    if (r < 1) throw std::invalid_argument("LBP: r must be >= 1, got " + std::to_string(r));
    if (!uniform && p > 16)
        throw std::invalid_argument("LBP: raw histograms need p <= 16 (got p=" + std::to_string(p) +
                                    "); use uniform mapping");
}

// ---------------------------------------------------------------------------
// Uniform mapping

int UniformMapping::transitions(std::uint32_t code, int p) noexcept {
    const std::uint32_t mask = p >= 32 ? ~0u : ((1u << p) - 1u);
    code &= mask;
    const std::uint32_t rotated = ((code >> 1) | ((code & 1u) << (p - 1))) & mask;
    return std::popcount(code ^ rotated);
}

UniformMapping::UniformMapping(int p) : p_(p) {
    if (p < 1 || p > 24) throw std::invalid_argument("UniformMapping: p must be in [1, 24]");
    const std::uint32_t all = (1u << p) - 1u;
    // Uniform codes are 0, all-ones, and every rotation of a contiguous run of
    // 1..p-1 ones; generating them directly avoids scanning 2^p codes.
    uniform_codes_.push_back(0);
    uniform_codes_.push_back(all);
    for (int len = 1; len < p; ++len) {
        const std::uint32_t run = (1u << len) - 1u;
        for (int rot = 0; rot < p; ++rot) {
            const std::uint32_t code = ((run << rot) | (run >> (p - rot))) & all;
            uniform_codes_.push_back(code);
        }
    }
    std::sort(uniform_codes_.begin(), uniform_codes_.end());
    uniform_codes_.erase(std::unique(uniform_codes_.begin(), uniform_codes_.end()), uniform_codes_.end());
    if (p <= 16) {
        direct_.assign(std::size_t{1} << p, static_cast<std::uint16_t>(nonuniform_bin()));
        for (std::size_t i = 0; i < uniform_codes_.size(); ++i)
            direct_[uniform_codes_[i]] = static_cast<std::uint16_t>(i);
    }
}

std::uint32_t UniformMapping::bin(std::uint32_t code) const {
    if (!direct_.empty()) return direct_[code];
    if (transitions(code, p_) > 2) return static_cast<std::uint32_t>(nonuniform_bin());
    const auto it = std::lower_bound(uniform_codes_.begin(), uniform_codes_.end(), code);
    return static_cast<std::uint32_t>(it - uniform_codes_.begin());
}

std::vector<std::uint32_t> UniformMapping::table() const {
    std::vector<std::uint32_t> out(std::size_t{1} << p_);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = bin(static_cast<std::uint32_t>(c));
    return out;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

constexpr double kSnap = 1e-6;
// Interpolated samples that land within this of the center count as ties.
// Exact ties (e.g. 111 + 48(1 - fx - fy) on a diagonal) come out a few ulp
// either side depending on evaluation order.
constexpr double kTie = 1e-9;

struct SamplePoint {
    int dx0 = 0, dy0 = 0;  // top-left integer offset
    int sx = 0, sy = 0;    // 1 if the sample straddles the next column / row
    bool exact = false;
    double fx = 0, fy = 0;
};

double snap(double v) {
    const double rounded = std::round(v);
    return std::abs(v - rounded) < kSnap ? rounded : v;
}

SamplePoint make_sample_point(int k, int p, int r) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p);
    const double dx = snap(-static_cast<double>(r) * std::sin(angle));
    const double dy = snap(static_cast<double>(r) * std::cos(angle));
    SamplePoint s;
    const double fx0 = std::floor(dx), fy0 = std::floor(dy);
    s.dx0 = static_cast<int>(fx0);
    s.dy0 = static_cast<int>(fy0);
    const double fx = dx - fx0, fy = dy - fy0;
    s.sx = fx > 0.0 ? 1 : 0;
    s.sy = fy > 0.0 ? 1 : 0;
    s.exact = s.sx == 0 && s.sy == 0;
    s.fx = fx;
    s.fy = fy;
    return s;
}

std::vector<SamplePoint> make_sample_points(const LbpConfig& cfg) {
    std::vector<SamplePoint> pts;
    pts.reserve(static_cast<std::size_t>(cfg.p));
    for (int k = 0; k < cfg.p; ++k) pts.push_back(make_sample_point(k, cfg.p, cfg.r));
    return pts;
}

template <typename T>
inline double read(const Image<T>& img, int cx, int cy, const SamplePoint& s) {
    const int x0 = cx + s.dx0, y0 = cy + s.dy0;
    if (s.exact) return static_cast<double>(img(x0, y0));
    const int x1 = x0 + s.sx, y1 = y0 + s.sy;
    // Bilinear blend as two nested lerps: same value as the four-weight sum,
    // but exact on flat patches, so ties with the center stay ties.
    const double a = static_cast<double>(img(x0, y0)), b = static_cast<double>(img(x1, y0));
    const double c = static_cast<double>(img(x0, y1)), d = static_cast<double>(img(x1, y1));
    const double top = a + s.fx * (b - a);
    const double bottom = c + s.fx * (d - c);
    return top + s.fy * (bottom - top);
}

template <typename T>
void check_center(const Image<T>& img, int cx, int cy, int r) {
    if (cx - r < 0 || cy - r < 0 || cx + r >= img.width() || cy + r >= img.height())
        throw std::out_of_range("LBP: circle of radius " + std::to_string(r) + " around (" + std::to_string(cx) +
                                "," + std::to_string(cy) + ") leaves the " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " image");
}

template <typename T>
inline std::uint32_t code_at(const Image<T>& img, int cx, int cy, const std::vector<SamplePoint>& pts) {
    const double center = static_cast<double>(img(cx, cy));
    std::uint32_t code = 0;
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (read(img, cx, cy, pts[k]) >= center - kTie) code |= 1u << k;
    return code;
}

template <typename T>
void check_histogram_input(const Image<T>& img, const LbpConfig& cfg) {
    cfg.validate();
    if (img.width() <= 2 * cfg.r || img.height() <= 2 * cfg.r)
        throw std::invalid_argument("LBP: " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                    " image has no valid center for r=" + std::to_string(cfg.r));
}

}  // namespace

template <typename T>
double sample_neighbor(const Image<T>& img, int cx, int cy, int k, const LbpConfig& cfg) {
    if (k < 0 || k >= cfg.p) throw std::out_of_range("LBP: neighbor index out of range");
    check_center(img, cx, cy, cfg.r);
    return read(img, cx, cy, make_sample_point(k, cfg.p, cfg.r));
}

template <typename T>
std::uint32_t lbp_code(const Image<T>& img, int cx, int cy, const LbpConfig& cfg) {
    check_center(img, cx, cy, cfg.r);
    return code_at(img, cx, cy, make_sample_points(cfg));
}

template <typename T>
Image<std::uint32_t> lbp_bin_map(const Image<T>& img, const LbpConfig& cfg) {
    check_histogram_input(img, cfg);
    const auto pts = make_sample_points(cfg);
    Image<std::uint32_t> out(img.width(), img.height(), 0u);
    if (cfg.uniform) {
        const UniformMapping mapping(cfg.p);
        for (int y = cfg.r; y < img.height() - cfg.r; ++y)
            for (int x = cfg.r; x < img.width() - cfg.r; ++x) out(x, y) = mapping.bin(code_at(img, x, y, pts));
    } else {
        for (int y = cfg.r; y < img.height() - cfg.r; ++y)
            for (int x = cfg.r; x < img.width() - cfg.r; ++x) out(x, y) = code_at(img, x, y, pts);
    }
    return out;
}

template <typename T>
LbpHistogram lbp_histogram(const Image<T>& img, const LbpConfig& cfg) {
    check_histogram_input(img, cfg);
    const auto pts = make_sample_points(cfg);
    std::vector<std::uint64_t> counts(cfg.histogram_size(), 0);
    if (cfg.uniform) {
        const UniformMapping mapping(cfg.p);
        for (int y = cfg.r; y < img.height() - cfg.r; ++y)
            for (int x = cfg.r; x < img.width() - cfg.r; ++x) ++counts[mapping.bin(code_at(img, x, y, pts))];
    } else {
        for (int y = cfg.r; y < img.height() - cfg.r; ++y)
            for (int x = cfg.r; x < img.width() - cfg.r; ++x) ++counts[code_at(img, x, y, pts)];
    }
    LbpHistogram h{std::vector<double>(counts.begin(), counts.end()), cfg};
    if (cfg.normalize) {
        const double total = static_cast<double>(img.width() - 2 * cfg.r) * static_cast<double>(img.height() - 2 * cfg.r);
        for (double& b : h.bins) b /= total;
    }
    return h;
}

template double sample_neighbor(const GrayImage&, int, int, int, const LbpConfig&);
template double sample_neighbor(const RealImage&, int, int, int, const LbpConfig&);
template std::uint32_t lbp_code(const GrayImage&, int, int, const LbpConfig&);
template std::uint32_t lbp_code(const RealImage&, int, int, const LbpConfig&);
template Image<std::uint32_t> lbp_bin_map(const GrayImage&, const LbpConfig&);
template Image<std::uint32_t> lbp_bin_map(const RealImage&, const LbpConfig&);
template LbpHistogram lbp_histogram(const GrayImage&, const LbpConfig&);
template LbpHistogram lbp_histogram(const RealImage&, const LbpConfig&);

}  // namespace kpath
