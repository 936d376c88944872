#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace texfuse {

/// 8-bit grayscale raster, row-major. The unit of classification input.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  uint8_t at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
  uint8_t& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }
};

/// Reads a binary PGM (P5, maxval 255) or an 8-bit grayscale PNG.
/// Color or paletted PNGs are rejected, not converted.
GrayImage load_image(const std::filesystem::path& path);

/// Writes P5 with maxval 255 (atomic: temp file + rename).
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Area-averaging (box filter) resample to target x target. Each output pixel
/// is the mean of its source box, fractional edge pixels weighted by overlap,
/// rounded half-up. Identity when the source is already target x target.
GrayImage resize_to(const GrayImage& img, int target);

}  // namespace texfuse
