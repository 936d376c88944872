// Test-only oracle: gray-level co-occurrence and the 13 Haralick statistics
// written straight from their definitions, one literal loop per quantity.
// Deliberately naive and kept independent of the library implementation.
#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "texfuse/glcm.hpp"

namespace texfuse::oracle {

// Counts every ordered pixel pair by scanning all position pairs; a pair
// contributes in both orders. Normalized by the grand total.
inline std::vector<double> glcm_bruteforce(const QuantizedImage& q, int dr, int dc, int distance) {
  const int L = q.levels;
  std::vector<double> counts(static_cast<size_t>(L) * L, 0.0);
  double total = 0.0;
  for (int r1 = 0; r1 < q.height; ++r1)
    for (int c1 = 0; c1 < q.width; ++c1)
      for (int r2 = 0; r2 < q.height; ++r2)
        for (int c2 = 0; c2 < q.width; ++c2)
          if (r2 - r1 == dr * distance && c2 - c1 == dc * distance) {
            counts[static_cast<size_t>(q.at(r1, c1)) * L + q.at(r2, c2)] += 1.0;
            counts[static_cast<size_t>(q.at(r2, c2)) * L + q.at(r1, c1)] += 1.0;
            total += 2.0;
          }
  if (total > 0.0)
    for (double& v : counts) v /= total;
  return counts;
}

inline double olog2(double p) { return p > 0.0 ? std::log2(p) : 0.0; }

inline double o_asm(const std::vector<double>& P, int L) {
  double s = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) s += P[i * L + j] * P[i * L + j];
  return s;
}

inline double o_contrast(const std::vector<double>& P, int L) {
  double s = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) s += (i - j) * (i - j) * P[i * L + j];
  return s;
}

inline std::vector<double> o_px(const std::vector<double>& P, int L) {
  std::vector<double> px(L, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) px[i] += P[i * L + j];
  return px;
}

inline std::vector<double> o_py(const std::vector<double>& P, int L) {
  std::vector<double> py(L, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) py[j] += P[i * L + j];
  return py;
}

inline std::vector<double> o_psum(const std::vector<double>& P, int L) {
  std::vector<double> ps(2 * L - 1, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) ps[i + j] += P[i * L + j];
  return ps;
}

inline std::vector<double> o_pdiff(const std::vector<double>& P, int L) {
  std::vector<double> pd(L, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) pd[std::abs(i - j)] += P[i * L + j];
  return pd;
}

inline double o_correlation(const std::vector<double>& P, int L) {
  const auto px = o_px(P, L), py = o_py(P, L);
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < L; ++i) {
    mx += i * px[i];
    my += i * py[i];
  }
  double vx = 0.0, vy = 0.0;
  for (int i = 0; i < L; ++i) {
    vx += (i - mx) * (i - mx) * px[i];
    vy += (i - my) * (i - my) * py[i];
  }
  const double sd = std::sqrt(vx) * std::sqrt(vy);
  if (sd == 0.0) return 0.0;
  double cross = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) cross += double(i) * j * P[i * L + j];
  return (cross - mx * my) / sd;
}

inline double o_ss_variance(const std::vector<double>& P, int L) {
  const auto px = o_px(P, L);
  double mu = 0.0;
  for (int i = 0; i < L; ++i) mu += i * px[i];
  double v = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) v += (i - mu) * (i - mu) * P[i * L + j];
  return v;
}

inline double o_idm(const std::vector<double>& P, int L) {
  double s = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) s += P[i * L + j] / (1.0 + (i - j) * (i - j));
  return s;
}

inline double o_sum_average(const std::vector<double>& P, int L) {
  const auto ps = o_psum(P, L);
  double s = 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) s += k * ps[k];
  return s;
}

inline double o_sum_entropy(const std::vector<double>& P, int L) {
  const auto ps = o_psum(P, L);
  double s = 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) s -= ps[k] * olog2(ps[k]);
  return s;
}

// Haralick's f7: spread of p_{x+y} around the sum entropy f8
inline double o_sum_variance(const std::vector<double>& P, int L) {
  const auto ps = o_psum(P, L);
  const double f8 = o_sum_entropy(P, L);
  double s = 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) s += (k - f8) * (k - f8) * ps[k];
  return s;
}

inline double o_entropy(const std::vector<double>& P, int L) {
  double s = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) s -= P[i * L + j] * olog2(P[i * L + j]);
  return s;
}

inline double o_diff_variance(const std::vector<double>& P, int L) {
  const auto pd = o_pdiff(P, L);
  double mu = 0.0;
  for (int k = 0; k < L; ++k) mu += k * pd[k];
  double s = 0.0;
  for (int k = 0; k < L; ++k) s += (k - mu) * (k - mu) * pd[k];
  return s;
}

inline double o_diff_entropy(const std::vector<double>& P, int L) {
  const auto pd = o_pdiff(P, L);
  double s = 0.0;
  for (int k = 0; k < L; ++k) s -= pd[k] * olog2(pd[k]);
  return s;
}

inline double o_imc1(const std::vector<double>& P, int L) {
  const auto px = o_px(P, L), py = o_py(P, L);
  double hx = 0.0, hy = 0.0;
  for (int i = 0; i < L; ++i) {
    hx -= px[i] * olog2(px[i]);
    hy -= py[i] * olog2(py[i]);
  }
  double hxy = 0.0, hxy1 = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      hxy -= P[i * L + j] * olog2(P[i * L + j]);
      if (P[i * L + j] > 0.0) hxy1 -= P[i * L + j] * olog2(px[i] * py[j]);
    }
  const double hmax = hx > hy ? hx : hy;
  if (hmax == 0.0) return 0.0;
  return (hxy - hxy1) / hmax;
}

inline double o_imc2(const std::vector<double>& P, int L) {
  const auto px = o_px(P, L), py = o_py(P, L);
  double hxy = 0.0, hxy2 = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      hxy -= P[i * L + j] * olog2(P[i * L + j]);
      hxy2 -= px[i] * py[j] * olog2(px[i] * py[j]);
    }
  const double inner = 1.0 - std::exp(-2.0 * (hxy2 - hxy));
  return std::sqrt(inner > 0.0 ? inner : 0.0);
}

inline std::array<double, 13> haralick_bruteforce(const std::vector<double>& P, int L) {
  return {o_asm(P, L),          o_contrast(P, L),     o_correlation(P, L), o_ss_variance(P, L),
          o_idm(P, L),          o_sum_average(P, L),  o_sum_variance(P, L), o_sum_entropy(P, L),
          o_entropy(P, L),      o_diff_variance(P, L), o_diff_entropy(P, L), o_imc1(P, L),
          o_imc2(P, L)};
}

// Full feature vector straight from the two oracles above.
inline std::vector<double> features_bruteforce(const GrayImage& img) {
  const QuantizedImage q = quantize(img, kGlcmLevels);
  std::vector<double> out;
  for (int d : kGlcmDistances) {
    std::vector<std::array<double, 13>> blocks;
    for (const Offset& o : kGlcmOffsets)
      blocks.push_back(haralick_bruteforce(glcm_bruteforce(q, o.dr, o.dc, d), q.levels));
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    for (int f = 0; f < 13; ++f)
      out.push_back((blocks[0][f] + blocks[1][f] + blocks[2][f] + blocks[3][f]) / 4.0);
  }
  return out;
}

}  // namespace texfuse::oracle
