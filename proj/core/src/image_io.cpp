#include "kpath/image_io.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpath {
namespace {

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// libtiff reports through global handlers; silence them and report via exceptions.
void quiet_handler(const char*, const char*, va_list) {}

RgbImage read_tiff(const std::filesystem::path& path) {
    TIFFSetErrorHandler(quiet_handler);
    TIFFSetWarningHandler(quiet_handler);
    std::unique_ptr<TIFF, void (*)(TIFF*)> tif(TIFFOpen(path.string().c_str(), "r"), TIFFClose);
    if (!tif) throw std::runtime_error("cannot open TIF file: " + path.string());
    std::uint32_t w = 0, h = 0;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h);
    if (w == 0 || h == 0) throw std::runtime_error("TIF file has no image data: " + path.string());
    std::vector<std::uint32_t> raster(static_cast<std::size_t>(w) * h);
    if (!TIFFReadRGBAImageOriented(tif.get(), w, h, raster.data(), ORIENTATION_TOPLEFT, 0))
        throw std::runtime_error("cannot decode TIF file: " + path.string());
    RgbImage out{GrayImage(static_cast<int>(w), static_cast<int>(h)),
                 GrayImage(static_cast<int>(w), static_cast<int>(h)),
                 GrayImage(static_cast<int>(w), static_cast<int>(h))};
    for (std::size_t i = 0; i < raster.size(); ++i) {
        out.r.pixels()[i] = static_cast<std::uint8_t>(TIFFGetR(raster[i]));
        out.g.pixels()[i] = static_cast<std::uint8_t>(TIFFGetG(raster[i]));
        out.b.pixels()[i] = static_cast<std::uint8_t>(TIFFGetB(raster[i]));
    }
    return out;
}

RgbImage read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw std::runtime_error("cannot open PNG file: " + path.string() + " (" + image.message + ")");
    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw std::runtime_error("cannot decode PNG file: " + path.string() + " (" + image.message + ")");
    }
    const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
    RgbImage out{GrayImage(w, h), GrayImage(w, h), GrayImage(w, h)};
    for (std::size_t i = 0; i < out.r.pixels().size(); ++i) {
        out.r.pixels()[i] = buffer[3 * i];
        out.g.pixels()[i] = buffer[3 * i + 1];
        out.b.pixels()[i] = buffer[3 * i + 2];
    }
    return out;
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".tif" || ext == ".tiff") return read_tiff(path);
    if (ext == ".png") return read_png(path);
    throw std::runtime_error("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels().data(), 0, nullptr))
        throw std::runtime_error("cannot write PNG file: " + path.string() + " (" + image.message + ")");
}

void write_tiff(const std::filesystem::path& path, const RgbImage& img) {
    if (img.r.width() != img.g.width() || img.r.width() != img.b.width() ||
        img.r.height() != img.g.height() || img.r.height() != img.b.height())
        throw std::invalid_argument("write_tiff: channel shapes differ");
    TIFFSetErrorHandler(quiet_handler);
    TIFFSetWarningHandler(quiet_handler);
    std::unique_ptr<TIFF, void (*)(TIFF*)> tif(TIFFOpen(path.string().c_str(), "w"), TIFFClose);
    if (!tif) throw std::runtime_error("cannot create TIF file: " + path.string());
    const int w = img.r.width(), h = img.r.height();
    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(w));
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(h));
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, 3);
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, 8);
    TIFFSetField(tif.get(), TIFFTAG_ORIENTATION, ORIENTATION_TOPLEFT);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_RGB);
    TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, 1);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            row[3 * x] = img.r(x, y);
            row[3 * x + 1] = img.g(x, y);
            row[3 * x + 2] = img.b(x, y);
        }
        if (TIFFWriteScanline(tif.get(), row.data(), static_cast<std::uint32_t>(y), 0) < 0)
            throw std::runtime_error("cannot write TIF scanline: " + path.string());
    }
}

}  // namespace kpath
