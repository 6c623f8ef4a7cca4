#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fer {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
    std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

    bool operator==(const GrayImage&) const = default;
};

/// Decodes a PGM image, binary (P5) or ASCII (P2), maxval up to 255.
/// Header comments starting with '#' are skipped.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage decode_pgm(const std::string& bytes);

/// Encodes as binary P5 with maxval 255. decode_pgm(encode_pgm(img)) == img.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

/// Crops a centered w x h window. When the leftover margin is odd the
/// extra pixel stays on the right/bottom side.
GrayImage center_crop(const GrayImage& img, std::size_t w, std::size_t h);

/// Bilinear resize with pixel-center alignment: the source coordinate of
/// destination pixel d is (d + 0.5) * src/dst - 0.5, clamped to the valid
/// range. Interpolated values round to nearest, ties away from zero.
GrayImage resize_bilinear(const GrayImage& img, std::size_t w, std::size_t h);

}  // namespace fer
