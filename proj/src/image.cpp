#include "texfuse/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "texfuse/util.hpp"

namespace texfuse {

namespace {

// Skips whitespace and '#' comment lines between PGM header tokens.
int next_pgm_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw std::runtime_error("unsupported format: bad PGM header in " + path);
  int v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = in.get();
  }
  // c was the single whitespace terminating the token; stream is now at the
  // next token (or at raster data after maxval).
  return v;
}

GrayImage load_pgm(std::istream& in, const std::string& path) {
  int width = next_pgm_int(in, path);
  int height = next_pgm_int(in, path);
  int maxval = next_pgm_int(in, path);
  if (maxval != 255) throw std::runtime_error("unsupported format: PGM maxval " + std::to_string(maxval) + " != 255 in " + path);
  if (width < 1 || height < 1) throw std::runtime_error("unsupported format: empty PGM " + path);
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<size_t>(in.gcount()) != img.pixels.size())
    throw std::runtime_error("unreadable file: truncated PGM raster in " + path);
  return img;
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

GrayImage load_png(const std::string& path) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw std::runtime_error("unreadable file: " + path);
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw std::runtime_error("png init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw std::runtime_error("png init failed");
  if (setjmp(png_jmpbuf(r.png))) throw std::runtime_error("unreadable file: corrupt PNG " + path);

  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);
  const int bit_depth = png_get_bit_depth(r.png, r.info);
  if (color_type != PNG_COLOR_TYPE_GRAY)
    throw std::runtime_error("unsupported: non-grayscale PNG " + path);
  if (bit_depth != 8)
    throw std::runtime_error("unsupported: PNG bit depth " + std::to_string(bit_depth) + " in " + path);

  png_set_interlace_handling(r.png);
  png_read_update_info(r.png, r.info);

  GrayImage img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  img.pixels.resize(static_cast<size_t>(img.width) * img.height);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + static_cast<size_t>(y) * img.width;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return img;
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("unreadable file: " + path.string());
  unsigned char magic[2] = {0, 0};
  in.read(reinterpret_cast<char*>(magic), 2);
  if (in.gcount() != 2) throw std::runtime_error("unreadable file: " + path.string());
  if (magic[0] == 'P' && magic[1] == '5') return load_pgm(in, path.string());
  if (magic[0] == 0x89 && magic[1] == 'P') {
    in.close();
    return load_png(path.string());
  }
  throw std::runtime_error("unsupported format: " + path.string());
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  atomic_write_file(path, out);
}

GrayImage resize_to(const GrayImage& img, int target) {
  if (target < 1) throw std::runtime_error("resize target must be >= 1");
  if (img.width == target && img.height == target) return img;

  GrayImage out;
  out.width = target;
  out.height = target;
  out.pixels.resize(static_cast<size_t>(target) * target);

  const double sy = static_cast<double>(img.height) / target;
  const double sx = static_cast<double>(img.width) / target;
  for (int oy = 0; oy < target; ++oy) {
    const double y0 = oy * sy, y1 = (oy + 1) * sy;
    const int ry0 = static_cast<int>(std::floor(y0));
    const int ry1 = std::min(img.height, static_cast<int>(std::ceil(y1)));
    for (int ox = 0; ox < target; ++ox) {
      const double x0 = ox * sx, x1 = (ox + 1) * sx;
      const int rx0 = static_cast<int>(std::floor(x0));
      const int rx1 = std::min(img.width, static_cast<int>(std::ceil(x1)));
      double sum = 0.0, area = 0.0;
      for (int y = ry0; y < ry1; ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        for (int x = rx0; x < rx1; ++x) {
          const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
          sum += wy * wx * img.at(y, x);
          area += wy * wx;
        }
      }
      const double mean = sum / area;
      const int v = std::min(255, static_cast<int>(std::floor(mean + 0.5)));
      out.at(oy, ox) = static_cast<uint8_t>(v);
    }
  }
  return out;
}

}  // namespace texfuse
