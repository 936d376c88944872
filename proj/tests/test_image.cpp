#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "texfuse/image.hpp"
#include "texfuse/util.hpp"

using namespace texfuse;
namespace fs = std::filesystem;

namespace {

// 2x2 gray PNG with pixels [0, 255, 128, 7]
const unsigned char kGrayPng2x2[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x08, 0x00, 0x00, 0x00, 0x00, 0x57, 0xdd, 0x52,
    0xf8, 0x00, 0x00, 0x00, 0x0e, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0xf8, 0xcf, 0xd0,
    0xc0, 0x0e, 0x00, 0x05, 0x09, 0x01, 0x87, 0x11, 0xf6, 0xd8, 0x28, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
};

// 2x2 RGB PNG
const unsigned char kRgbPng2x2[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x08, 0x02, 0x00, 0x00, 0x00, 0xfd, 0xd4, 0x9a,
    0x73, 0x00, 0x00, 0x00, 0x16, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0,
    0xf0, 0x9f, 0x81, 0x81, 0x81, 0xe1, 0x3f, 0x97, 0x88, 0x1c, 0x00, 0x1a, 0x58, 0x03, 0x3a, 0x82,
    0xe0, 0xab, 0x53, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
};

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "texfuse_image_test";
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& p, const unsigned char* data, size_t n) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
}

GrayImage constant_image(int w, int h, uint8_t v) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<size_t>(w) * h, v);
  return img;
}

}  // namespace

TEST_CASE("pgm round trip preserves bytes exactly") {
  const fs::path p = temp_dir() / "tiny.pgm";
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.pixels = {0, 255, 128, 7};
  save_pgm(img, p);

  const GrayImage back = load_image(p);
  CHECK(back.width == 2);
  CHECK(back.height == 2);
  CHECK(back.pixels == std::vector<uint8_t>{0, 255, 128, 7});
}

TEST_CASE("pgm header with comments and 64x64 size") {
  const fs::path p = temp_dir() / "hdr.pgm";
  std::string content = "P5\n# a comment\n64 64\n# another\n255\n";
  content.append(4096, '\x42');
  atomic_write_file(p, content);
  const GrayImage img = load_image(p);
  CHECK(img.width == 64);
  CHECK(img.height == 64);
  CHECK(img.pixels.size() == 4096);
  CHECK(img.pixels[0] == 0x42);
}

TEST_CASE("pgm with maxval != 255 is rejected") {
  const fs::path p = temp_dir() / "deep.pgm";
  atomic_write_file(p, std::string("P5\n2 2\n65535\n") + std::string(8, 'x'));
  CHECK_THROWS_WITH_AS(load_image(p), doctest::Contains("maxval"), std::runtime_error);
}

TEST_CASE("truncated pgm raster is rejected") {
  const fs::path p = temp_dir() / "short.pgm";
  atomic_write_file(p, std::string("P5\n4 4\n255\n") + std::string(5, 'x'));
  CHECK_THROWS_AS(load_image(p), std::runtime_error);
}

TEST_CASE("grayscale png loads with exact pixel values") {
  const fs::path p = temp_dir() / "gray.png";
  write_bytes(p, kGrayPng2x2, sizeof kGrayPng2x2);
  const GrayImage img = load_image(p);
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.pixels == std::vector<uint8_t>{0, 255, 128, 7});
}

TEST_CASE("rgb png is rejected, not converted") {
  const fs::path p = temp_dir() / "rgb.png";
  write_bytes(p, kRgbPng2x2, sizeof kRgbPng2x2);
  CHECK_THROWS_WITH_AS(load_image(p), doctest::Contains("unsupported: non-grayscale"), std::runtime_error);
}

TEST_CASE("missing and unknown files error") {
  CHECK_THROWS_WITH_AS(load_image(temp_dir() / "nope.pgm"), doctest::Contains("unreadable"), std::runtime_error);
  const fs::path p = temp_dir() / "junk.bin";
  atomic_write_file(p, "GIF89a.....");
  CHECK_THROWS_WITH_AS(load_image(p), doctest::Contains("unsupported format"), std::runtime_error);
}

TEST_CASE("resize: constant image stays constant") {
  const GrayImage out = resize_to(constant_image(4, 4, 100), 2);
  CHECK(out.width == 2);
  CHECK(out.height == 2);
  for (uint8_t v : out.pixels) CHECK(v == 100);
}

TEST_CASE("resize: mean 127.5 rounds half-up to 128") {
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.pixels = {0, 0, 255, 255};
  const GrayImage out = resize_to(img, 1);
  REQUIRE(out.pixels.size() == 1);
  CHECK(out.pixels[0] == 128);
}

TEST_CASE("resize: 567x567 downscales to 64x64") {
  GrayImage img = constant_image(567, 567, 0);
  for (int y = 0; y < 567; ++y)
    for (int x = 0; x < 567; ++x) img.at(y, x) = static_cast<uint8_t>((x + y) % 256);
  const GrayImage out = resize_to(img, 64);
  CHECK(out.width == 64);
  CHECK(out.height == 64);
}

TEST_CASE("resize is identity when source equals target") {
  GrayImage img = constant_image(64, 64, 0);
  for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<uint8_t>(i * 7 % 256);
  const GrayImage out = resize_to(img, 64);
  CHECK(out.pixels == img.pixels);
}

TEST_CASE("resize: fractional boxes use area weighting") {
  // 3x3 -> 2x2: output (0,0) covers [0,1.5)^2, so the mean is
  // (p00 + .5*p01 + .5*p10 + .25*p11) / 2.25
  GrayImage img;
  img.width = 3;
  img.height = 3;
  img.pixels = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  const GrayImage out = resize_to(img, 2);
  const double expect = (10 + 0.5 * 20 + 0.5 * 40 + 0.25 * 50) / 2.25;
  CHECK(out.at(0, 0) == static_cast<uint8_t>(std::floor(expect + 0.5)));
}
