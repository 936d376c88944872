#include "texfuse/glcm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "texfuse/util.hpp"

namespace texfuse {

const std::array<const char*, kHaralickCount> kHaralickNames = {
    "angular_second_moment", "contrast",       "correlation",       "sum_of_squares_variance",
    "inverse_difference_moment", "sum_average", "sum_variance",     "sum_entropy",
    "entropy",               "difference_variance", "difference_entropy",
    "info_measure_correlation_1", "info_measure_correlation_2"};

QuantizedImage quantize(const GrayImage& img, int levels) {
  if (levels < 2) throw std::runtime_error("quantize: levels must be >= 2");
  QuantizedImage q;
  q.width = img.width;
  q.height = img.height;
  q.levels = levels;
  q.values.resize(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i)
    q.values[i] = static_cast<uint8_t>(img.pixels[i] * levels / 256);
  return q;
}

Glcm cooccurrence(const QuantizedImage& q, Offset offset, int distance) {
  if (distance < 1) throw std::runtime_error("cooccurrence: distance must be >= 1");
  const int dr = offset.dr * distance;
  const int dc = offset.dc * distance;
  const int L = q.levels;

  std::vector<int64_t> counts(static_cast<size_t>(L) * L, 0);
  int64_t total = 0;
  for (int r = 0; r < q.height; ++r) {
    const int r2 = r + dr;
    if (r2 < 0 || r2 >= q.height) continue;
    for (int c = 0; c < q.width; ++c) {
      const int c2 = c + dc;
      if (c2 < 0 || c2 >= q.width) continue;
      const int a = q.at(r, c), b = q.at(r2, c2);
      // symmetrize: count the pair in both orders
      ++counts[static_cast<size_t>(a) * L + b];
      ++counts[static_cast<size_t>(b) * L + a];
      total += 2;
    }
  }
  if (total == 0) throw std::runtime_error("no valid pairs");

  Glcm g;
  g.levels = L;
  g.distance = distance;
  g.offset = offset;
  g.p.resize(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) g.p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return g;
}

namespace {

inline double plog2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

std::array<double, kHaralickCount> haralick13(const Glcm& g) {
  const int L = g.levels;
  std::vector<double> px(L, 0.0), py(L, 0.0);
  std::vector<double> psum(2 * L - 1, 0.0);   // p_{x+y}, index i+j
  std::vector<double> pdiff(L, 0.0);          // p_{x-y}, index |i-j|

  double asm_ = 0.0, contrast = 0.0, idm = 0.0, entropy = 0.0, cross = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double p = g.at(i, j);
      px[i] += p;
      py[j] += p;
      psum[i + j] += p;
      pdiff[std::abs(i - j)] += p;
      asm_ += p * p;
      contrast += static_cast<double>(i - j) * (i - j) * p;
      idm += p / (1.0 + static_cast<double>(i - j) * (i - j));
      entropy -= plog2(p);
      cross += static_cast<double>(i) * j * p;
    }

  double mean_x = 0.0, mean_y = 0.0;
  for (int i = 0; i < L; ++i) {
    mean_x += i * px[i];
    mean_y += i * py[i];
  }
  double var_x = 0.0, var_y = 0.0;
  for (int i = 0; i < L; ++i) {
    var_x += (i - mean_x) * (i - mean_x) * px[i];
    var_y += (i - mean_y) * (i - mean_y) * py[i];
  }
  const double sd = std::sqrt(var_x) * std::sqrt(var_y);
  const double correlation = sd > 0.0 ? (cross - mean_x * mean_y) / sd : 0.0;

  // sum-of-squares variance spreads around the marginal mean
  double ss_variance = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) ss_variance += (i - mean_x) * (i - mean_x) * g.at(i, j);

  double sum_avg = 0.0, sum_entropy = 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) {
    sum_avg += k * psum[k];
    sum_entropy -= plog2(psum[k]);
  }
  // sum variance is centered on sum entropy (Haralick's f7 definition)
  double sum_var = 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) sum_var += (k - sum_entropy) * (k - sum_entropy) * psum[k];

  double diff_mean = 0.0, diff_entropy = 0.0;
  for (int k = 0; k < L; ++k) {
    diff_mean += k * pdiff[k];
    diff_entropy -= plog2(pdiff[k]);
  }
  double diff_var = 0.0;
  for (int k = 0; k < L; ++k) diff_var += (k - diff_mean) * (k - diff_mean) * pdiff[k];

  double hx = 0.0, hy = 0.0, hxy1 = 0.0, hxy2 = 0.0;
  for (int i = 0; i < L; ++i) {
    hx -= plog2(px[i]);
    hy -= plog2(py[i]);
  }
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double m = px[i] * py[j];
      if (g.at(i, j) > 0.0 && m > 0.0) hxy1 -= g.at(i, j) * std::log2(m);
      hxy2 -= plog2(m);
    }
  const double hmax = std::max(hx, hy);
  const double imc1 = hmax > 0.0 ? (entropy - hxy1) / hmax : 0.0;
  const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - entropy))));

  return {asm_,    contrast,  correlation, ss_variance, idm,         sum_avg,      sum_var,
          sum_entropy, entropy, diff_var,   diff_entropy, imc1,       imc2};
}

std::vector<double> extract_features(const GrayImage& img, bool mean_only) {
  if (img.width < 6 || img.height < 6)
    throw std::runtime_error("extract_features: image must be at least 6x6 for distance 5");

  const QuantizedImage q = quantize(img, kGlcmLevels);
  std::vector<double> out;
  out.reserve(mean_only ? kFeatureDimMeanOnly : kFeatureDim);

  for (int d : kGlcmDistances) {
    std::array<std::array<double, kHaralickCount>, 4> blocks;
    for (size_t o = 0; o < kGlcmOffsets.size(); ++o)
      blocks[o] = haralick13(cooccurrence(q, kGlcmOffsets[o], d));

    if (!mean_only)
      for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());

    for (int f = 0; f < kHaralickCount; ++f)
      out.push_back((blocks[0][f] + blocks[1][f] + blocks[2][f] + blocks[3][f]) / 4.0);
  }
  return out;
}

void save_feature_cache(const FeatureCache& cache, const std::filesystem::path& path) {
  std::string out = "TXF1";
  write_u32(out, static_cast<uint32_t>(cache.labels.size()));
  write_u32(out, cache.dim);
  for (size_t i = 0; i < cache.labels.size(); ++i) {
    write_u32(out, static_cast<uint32_t>(cache.labels[i]));
    for (double v : cache.features[i]) write_f64(out, v);
  }
  atomic_write_file(path, out);
}

FeatureCache load_feature_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature cache: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "TXF1", 4) != 0)
    throw std::runtime_error("bad feature cache magic in " + path.string());
  FeatureCache cache;
  const uint32_t n = read_u32(in);
  cache.dim = read_u32(in);
  cache.labels.resize(n);
  cache.features.assign(n, std::vector<double>(cache.dim));
  for (uint32_t i = 0; i < n; ++i) {
    cache.labels[i] = static_cast<int>(read_u32(in));
    for (uint32_t k = 0; k < cache.dim; ++k) cache.features[i][k] = read_f64(in);
  }
  return cache;
}

}  // namespace texfuse
