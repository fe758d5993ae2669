#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpath {

/// Row-major single-channel image. Pixel (x, y) lives at index y * width + x.
template <typename T>
class Image {
public:
    using value_type = T;

    Image() = default;

    Image(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        if (width < 0 || height < 0)
            throw std::invalid_argument("Image: negative dimensions");
        pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Image(int width, int height, std::vector<T> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (width < 0 || height < 0)
            throw std::invalid_argument("Image: negative dimensions");
        if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw std::invalid_argument("Image: pixel count " + std::to_string(pixels_.size()) +
                                        " does not match " + std::to_string(width) + "x" +
                                        std::to_string(height));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    T& operator()(int x, int y) noexcept { return pixels_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return pixels_[index(x, y)]; }

    T& at(int x, int y) {
        check(x, y);
        return pixels_[index(x, y)];
    }
    const T& at(int x, int y) const {
        check(x, y);
        return pixels_[index(x, y)];
    }

    const std::vector<T>& pixels() const noexcept { return pixels_; }
    std::vector<T>& pixels() noexcept { return pixels_; }
    const T* row(int y) const noexcept { return pixels_.data() + static_cast<std::size_t>(y) * width_; }

    /// Copy of the rectangle [x0, x0 + w) x [y0, y0 + h).
    Image crop(int x0, int y0, int w, int h) const {
        if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_)
            throw std::out_of_range("Image::crop: rectangle outside image");
        Image out(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out(x, y) = (*this)(x0 + x, y0 + y);
        return out;
    }

    template <typename U>
    Image<U> cast() const {
        std::vector<U> out(pixels_.begin(), pixels_.end());
        return Image<U>(width_, height_, std::move(out));
    }

    friend bool operator==(const Image& a, const Image& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.pixels_ == b.pixels_;
    }

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }
    void check(int x, int y) const {
        if (x < 0 || y < 0 || x >= width_ || y >= height_)
            throw std::out_of_range("Image: pixel (" + std::to_string(x) + "," + std::to_string(y) +
                                    ") outside " + std::to_string(width_) + "x" +
                                    std::to_string(height_));
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> pixels_;
};

/// 8-bit intensities in [0, 255]. This is what the dataset loader produces.
using GrayImage = Image<std::uint8_t>;

/// Real-valued intensities, used by tests that need exact scaling arithmetic.
using RealImage = Image<double>;

}  // namespace kpath
