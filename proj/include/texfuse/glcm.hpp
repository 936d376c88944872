#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "texfuse/image.hpp"

namespace texfuse {

inline constexpr int kGlcmLevels = 8;
inline constexpr std::array<int, 3> kGlcmDistances = {1, 3, 5};

/// (row delta, col delta) pixel offsets: 0, 45, 90 and 135 degrees.
struct Offset {
  int dr = 0;
  int dc = 0;
  bool operator==(const Offset&) const = default;
};
inline constexpr std::array<Offset, 4> kGlcmOffsets = {{{0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

/// 13 statistics per GLCM, for each of 4 directions plus their mean,
/// for each of 3 distances: 13 * 5 * 3.
inline constexpr int kHaralickCount = 13;
inline constexpr int kFeatureDim = kHaralickCount * 5 * 3;
inline constexpr int kFeatureDimMeanOnly = kHaralickCount * 3;

extern const std::array<const char*, kHaralickCount> kHaralickNames;

struct QuantizedImage {
  int width = 0;
  int height = 0;
  int levels = 0;
  std::vector<uint8_t> values;  // row-major, each < levels

  uint8_t at(int row, int col) const { return values[static_cast<size_t>(row) * width + col]; }
};

/// value = floor(pixel * levels / 256)
QuantizedImage quantize(const GrayImage& img, int levels);

/// Symmetric, normalized co-occurrence matrix.
struct Glcm {
  int levels = 0;
  int distance = 0;
  Offset offset;
  std::vector<double> p;  // levels x levels, row-major

  double at(int i, int j) const { return p[static_cast<size_t>(i) * levels + j]; }
};

/// Counts ordered pairs (p, p + distance*offset) over all in-bounds
/// positions, adds the transpose, and normalizes by the symmetric total.
/// Throws "no valid pairs" when the image admits none at this offset.
Glcm cooccurrence(const QuantizedImage& q, Offset offset, int distance);

/// The 13 Haralick statistics in fixed order (see kHaralickNames):
/// angular second moment, contrast, correlation, sum of squares variance,
/// inverse difference moment, sum average, sum variance, sum entropy,
/// entropy, difference variance, difference entropy, and the two information
/// measures of correlation. Logs are base 2 with 0*log(0) = 0; statistics
/// that degenerate to 0/0 on a constant image are defined as 0.
std::array<double, kHaralickCount> haralick13(const Glcm& g);

/// Full 195-dim vector: per distance, the 4 directional blocks then their
/// elementwise mean. mean_only keeps just the 39 directional-mean features.
std::vector<double> extract_features(const GrayImage& img, bool mean_only = false);

// ---- feature cache --------------------------------------------------------
// Binary, little-endian: magic "TXF1", u32 sample count, u32 dimension, then
// per sample a u32 class index followed by `dimension` f64 values.

struct FeatureCache {
  uint32_t dim = 0;
  std::vector<int> labels;
  std::vector<std::vector<double>> features;
};

void save_feature_cache(const FeatureCache& cache, const std::filesystem::path& path);
FeatureCache load_feature_cache(const std::filesystem::path& path);

}  // namespace texfuse
