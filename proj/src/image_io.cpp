#include "edgeforge/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

namespace edgeforge {

namespace {

constexpr int kThreshold = 128;

int read_header_int(std::istream& in, const std::string& what) {
  // Skips whitespace and '#' comments between header tokens.
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = -1;
  if (!(in >> v) || v < 0) throw ImageIoError("bad PGM header field: " + what);
  return v;
}

EdgeImage read_pgm(std::istream& in, const std::string& magic) {
  const int width = read_header_int(in, "width");
  const int height = read_header_int(in, "height");
  if (width <= 0 || height <= 0) throw ImageIoError("PGM image has empty size");
  EdgeImage img = EdgeImage::blank(width, height);
  if (magic == "P4") {
    in.get();
    const std::size_t row_bytes = (static_cast<std::size_t>(width) + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (int y = 0; y < height; ++y) {
      if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes))) {
        throw ImageIoError("truncated P4 data");
      }
      for (int x = 0; x < width; ++x) {
        const bool black = (row[static_cast<std::size_t>(x) / 8] >> (7 - x % 8)) & 1;
        img.set(x, y, !black);
      }
    }
    return img;
  }
  const int maxval = read_header_int(in, "maxval");
  if (maxval <= 0 || maxval > 255) throw ImageIoError("only 8-bit PGM is supported");
  in.get();
  std::vector<unsigned char> data(img.mask.size());
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()))) {
    throw ImageIoError("truncated P5 data");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int level = maxval == 255 ? data[i] : data[i] * 255 / maxval;
    img.mask[i] = level >= kThreshold ? 1 : 0;
  }
  return img;
}

EdgeImage read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw ImageIoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("libpng initialisation failed");
  }
  EdgeImage img;
  std::string failure;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("corrupt PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const auto width = static_cast<int>(png_get_image_width(png, info));
  const auto height = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
    failure = "PNG must be 8-bit grayscale: " + path.string();
  } else {
    img = EdgeImage::blank(width, height);
    std::vector<png_byte> row(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
      png_read_row(png, row.data(), nullptr);
      for (int x = 0; x < width; ++x) img.set(x, y, row[static_cast<std::size_t>(x)] >= kThreshold);
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!failure.empty()) throw ImageIoError(failure);
  return img;
}

}  // namespace

EdgeImage read_edge_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open edge image " + path.string());
  char sig[8] = {};
  in.read(sig, 8);
  static constexpr unsigned char kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() == 8 && std::equal(sig, sig + 8, reinterpret_cast<const char*>(kPng))) {
    in.close();
    return read_png(path);
  }
  in.clear();
  in.seekg(0);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P4" && magic != "P5") throw ImageIoError("unsupported edge image format: " + path.string());
  return read_pgm(in, magic);
}

void write_pgm(const EdgeImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<char> data(img.mask.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = img.mask[i] ? static_cast<char>(255) : 0;
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw ImageIoError("failed writing " + path.string());
}

}  // namespace edgeforge
