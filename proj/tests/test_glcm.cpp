#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles/glcm_oracle.hpp"
#include "texfuse/glcm.hpp"

using namespace texfuse;

namespace {

GrayImage random_image(int w, int h, uint64_t seed) {
  std::mt19937_64 gen(seed);
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<size_t>(w) * h);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(gen() % 256);
  return img;
}

GrayImage constant_image(int w, int h, uint8_t v) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<size_t>(w) * h, v);
  return img;
}

// counterclockwise quarter turn: out(W-1-c, r) = in(r, c)
GrayImage rot90(const GrayImage& img) {
  GrayImage out;
  out.width = img.height;
  out.height = img.width;
  out.pixels.resize(img.pixels.size());
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) out.at(img.width - 1 - c, r) = img.at(r, c);
  return out;
}

}  // namespace

TEST_CASE("quantize maps bins by floor(p * levels / 256)") {
  GrayImage img;
  img.width = 5;
  img.height = 2;
  img.pixels = {0, 255, 128, 31, 32, 0, 0, 0, 0, 0};
  const QuantizedImage q = quantize(img, 8);
  CHECK(q.values[0] == 0);
  CHECK(q.values[1] == 7);
  CHECK(q.values[2] == 4);
  CHECK(q.values[3] == 0);
  CHECK(q.values[4] == 1);

  const QuantizedImage qc = quantize(constant_image(4, 4, 99), 8);
  for (auto v : qc.values) CHECK(v == quantize(constant_image(1, 1, 99), 8).values[0]);
}

TEST_CASE("cooccurrence on a constant image is a delta at (v, v)") {
  const QuantizedImage q = quantize(constant_image(2, 2, 200), 8);
  const Glcm g = cooccurrence(q, {0, 1}, 1);
  const int v = q.values[0];
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(g.at(i, j) == (i == v && j == v ? 1.0 : 0.0));
}

TEST_CASE("cooccurrence on a 2x2 checkerboard splits mass between (0,7) and (7,0)") {
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.pixels = {0, 255, 255, 0};
  const Glcm g = cooccurrence(quantize(img, 8), {0, 1}, 1);
  CHECK(g.at(0, 7) == doctest::Approx(0.5));
  CHECK(g.at(7, 0) == doctest::Approx(0.5));
  CHECK(g.at(0, 0) == 0.0);
  CHECK(g.at(7, 7) == 0.0);
}

TEST_CASE("no valid pairs raises") {
  const QuantizedImage q = quantize(constant_image(2, 2, 10), 8);
  CHECK_THROWS_WITH_AS(cooccurrence(q, {0, 1}, 5), doctest::Contains("no valid pairs"), std::runtime_error);
}

TEST_CASE("glcm is symmetric and normalized on random images") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const QuantizedImage q = quantize(random_image(8, 8, seed), 8);
    for (const Offset& o : kGlcmOffsets)
      for (int d : kGlcmDistances) {
        const Glcm g = cooccurrence(q, o, d);
        double sum = 0.0;
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) {
            CHECK(g.at(i, j) == g.at(j, i));  // exact: integer counts
            sum += g.at(i, j);
          }
        CHECK(std::abs(sum - 1.0) < 1e-12);
      }
  }
}

TEST_CASE("rotating the image by 90 degrees maps offset [0 1] to [-1 0]") {
  for (uint64_t seed = 100; seed < 106; ++seed) {
    const GrayImage img = random_image(7, 5, seed);
    const GrayImage rot = rot90(img);
    for (int d : {1, 2}) {
      const Glcm a = cooccurrence(quantize(img, 8), {0, 1}, d);
      const Glcm b = cooccurrence(quantize(rot, 8), {-1, 0}, d);
      for (int i = 0; i < 64; ++i) CHECK(a.p[i] == b.p[i]);
    }
  }
}

TEST_CASE("glcm matches the brute-force pair-counting oracle exactly") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    const QuantizedImage q = quantize(random_image(8, 8, seed), 8);
    for (const Offset& o : kGlcmOffsets)
      for (int d : kGlcmDistances) {
        const Glcm g = cooccurrence(q, o, d);
        const auto ref = oracle::glcm_bruteforce(q, o.dr, o.dc, d);
        for (size_t i = 0; i < ref.size(); ++i) CHECK(g.p[i] == ref[i]);
      }
  }
}

TEST_CASE("haralick on a delta glcm hits the degenerate conventions") {
  const Glcm g = cooccurrence(quantize(constant_image(4, 4, 200), 8), {0, 1}, 1);
  const auto f = haralick13(g);
  CHECK(f[0] == doctest::Approx(1.0));   // angular second moment
  CHECK(f[1] == doctest::Approx(0.0));   // contrast
  CHECK(f[2] == doctest::Approx(0.0));   // correlation: 0/0 -> 0
  CHECK(f[4] == doctest::Approx(1.0));   // inverse difference moment
  CHECK(f[8] == doctest::Approx(0.0));   // entropy
  CHECK(f[11] == doctest::Approx(0.0));  // imc1: 0/0 -> 0
  for (double v : f) CHECK(std::isfinite(v));
}

TEST_CASE("haralick on the checkerboard glcm: contrast 49, asm 0.5, entropy 1 bit") {
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.pixels = {0, 255, 255, 0};
  const auto f = haralick13(cooccurrence(quantize(img, 8), {0, 1}, 1));
  CHECK(f[1] == doctest::Approx(49.0));
  CHECK(f[0] == doctest::Approx(0.5));
  CHECK(f[8] == doctest::Approx(1.0));
}

TEST_CASE("haralick features match the definitional oracle within 1e-10") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    const QuantizedImage q = quantize(random_image(8, 8, seed), 8);
    for (const Offset& o : kGlcmOffsets)
      for (int d : kGlcmDistances) {
        const Glcm g = cooccurrence(q, o, d);
        const auto got = haralick13(g);
        const auto ref = oracle::haralick_bruteforce(g.p, g.levels);
        for (int k = 0; k < kHaralickCount; ++k) CHECK(std::abs(got[k] - ref[k]) < 1e-10);
      }
  }
}

TEST_CASE("feature vector layout and oracle concatenation") {
  const GrayImage img = random_image(16, 16, 77);
  const auto got = extract_features(img);
  REQUIRE(got.size() == 195);
  const auto ref = oracle::features_bruteforce(img);
  REQUIRE(ref.size() == 195);
  for (size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-10);
}

TEST_CASE("directional mean block is the elementwise mean of the four blocks") {
  const GrayImage img = random_image(12, 12, 5);
  const auto f = extract_features(img);
  for (int d = 0; d < 3; ++d) {
    const size_t base = static_cast<size_t>(d) * 65;
    for (int k = 0; k < 13; ++k) {
      const double mean = (f[base + k] + f[base + 13 + k] + f[base + 26 + k] + f[base + 39 + k]) / 4.0;
      CHECK(f[base + 52 + k] == doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant image: all directional blocks equal their mean block") {
  const auto f = extract_features(constant_image(64, 64, 123));
  REQUIRE(f.size() == 195);
  for (int d = 0; d < 3; ++d) {
    const size_t base = static_cast<size_t>(d) * 65;
    for (int k = 0; k < 13; ++k)
      for (int dir = 0; dir < 4; ++dir) CHECK(f[base + 13 * dir + k] == doctest::Approx(f[base + 52 + k]));
  }
}

TEST_CASE("any 64x64 image yields 195 finite features; mean-only yields 39") {
  const GrayImage img = random_image(64, 64, 3);
  const auto f = extract_features(img);
  CHECK(f.size() == 195);
  for (double v : f) CHECK(std::isfinite(v));
  CHECK(extract_features(img, true).size() == 39);
}

TEST_CASE("too-small images propagate the pair error") {
  CHECK_THROWS_AS(extract_features(constant_image(5, 5, 1)), std::runtime_error);
}

TEST_CASE("feature cache round trip is bit exact") {
  namespace fs = std::filesystem;
  FeatureCache cache;
  cache.dim = 195;
  for (uint64_t s = 0; s < 5; ++s) {
    cache.labels.push_back(static_cast<int>(s % 3));
    cache.features.push_back(extract_features(random_image(16, 16, s)));
  }
  const fs::path p = fs::temp_directory_path() / "texfuse_cache_test.bin";
  save_feature_cache(cache, p);
  const FeatureCache back = load_feature_cache(p);
  CHECK(back.dim == cache.dim);
  CHECK(back.labels == cache.labels);
  for (size_t i = 0; i < cache.features.size(); ++i)
    for (size_t k = 0; k < cache.features[i].size(); ++k) CHECK(back.features[i][k] == cache.features[i][k]);
  fs::remove(p);
}
