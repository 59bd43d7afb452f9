#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ctmls {

// 8-bit single-channel raster, row-major. The universal pixel carrier.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return pixels.size(); }
};

// Validating constructor; throws DataError on inconsistent dimensions.
GrayImage make_image(int width, int height, std::vector<std::uint8_t> pixels);
GrayImage make_image(int width, int height, std::uint8_t fill = 0);

// 256-bin intensity counts. total == width*height of the source image.
struct Histogram {
    std::array<std::uint64_t, 256> counts{};
    std::uint64_t total = 0;
};

// Reads a binary PGM (P5, maxval 255) or an 8-bit grayscale PNG.
// Color or high-bit-depth inputs are rejected, never converted.
GrayImage load_image(const std::filesystem::path& path);

// Canonical bit-exact output format: binary PGM, maxval 255.
void save_pgm(const GrayImage& img, const std::filesystem::path& path,
              const std::string& comment = "");

// Bilinear resize with half-pixel-center sampling; results rounded to the
// nearest integer and clamped to [0,255]. Resizing to the same size is the
// identity.
GrayImage resize_bilinear(const GrayImage& img, int width, int height);

Histogram histogram(const GrayImage& img);

}  // namespace ctmls
