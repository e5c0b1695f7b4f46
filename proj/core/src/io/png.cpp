#include "anovox/io/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace anovox {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_gray_png(const std::filesystem::path& path, int width, int height, int bit_depth,
                    const std::vector<std::uint16_t>& pixels) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("png: cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: write failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(width) * (bit_depth / 8));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::uint16_t v = pixels[static_cast<std::size_t>(y) * width + x];
      if (bit_depth == 16) {
        row[2 * x] = static_cast<png_byte>(v >> 8);  // network byte order
        row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
      } else {
        row[x] = static_cast<png_byte>(v);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void read_gray_png(const std::filesystem::path& path, int& width, int& height, int& bit_depth,
                   std::vector<std::uint16_t>& pixels) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("png: cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: read failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: " + path.string() + " is not grayscale");
  }
  if (bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    bit_depth = 8;
  }
  png_read_update_info(png, info);

  pixels.assign(static_cast<std::size_t>(width) * height, 0);
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      std::uint16_t v;
      if (bit_depth == 16) {
        v = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
      } else {
        v = row[x];
      }
      pixels[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

}  // namespace

void write_png_gray8(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint16_t> pixels(image.pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double clamped = std::clamp(image.pixels[i], 0.0, 1.0);
    pixels[i] = static_cast<std::uint16_t>(std::lround(clamped * 255.0));
  }
  write_gray_png(path, image.width, image.height, 8, pixels);
}

Image read_png_gray(const std::filesystem::path& path) {
  int width, height, bit_depth;
  std::vector<std::uint16_t> pixels;
  read_gray_png(path, width, height, bit_depth, pixels);
  Image image(width, height);
  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    image.pixels[i] = static_cast<double>(pixels[i]) / scale;
  }
  return image;
}

void write_png_label16(const std::filesystem::path& path, const AnnotationImage& annotation) {
  write_gray_png(path, annotation.width, annotation.height, 16, annotation.ids);
}

AnnotationImage read_png_label16(const std::filesystem::path& path) {
  int width, height, bit_depth;
  std::vector<std::uint16_t> pixels;
  read_gray_png(path, width, height, bit_depth, pixels);
  AnnotationImage annotation(width, height);
  annotation.ids = std::move(pixels);
  return annotation;
}

}  // namespace anovox
