#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridseg/grid.hpp"

namespace gridseg::image {

/// 8-bit RGB, rows stored top to bottom.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

/// PPM (P6 or P3) or PNG, detected from the file's magic bytes.
RgbImage read_image(const std::string& path);
/// PNG when the path ends in ".png", binary PPM otherwise.
void write_image(const std::string& path, const RgbImage& img);

RgbImage read_ppm(std::istream& in);
void write_ppm(std::ostream& out, const RgbImage& img);

/// p = 3 grid with channels in [0, 1]. Column x maps to w = x + 1 and row y
/// (from the top) maps to h = height - y, so h grows upward as in the quadrant convention.
Grid to_grid(const RgbImage& img);
/// Inverse of to_grid; values are clamped to [0, 1] and rounded to 8 bits.
RgbImage from_grid(const Grid& grid);

/// Adds i.i.d. Normal(0, variance) noise to every component.
Grid add_gaussian_noise(const Grid& grid, double variance, std::uint64_t seed);

}  // namespace gridseg::image
