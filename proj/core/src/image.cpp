#include "pat/render/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include <fmt/format.h>
#include <png.h>

#include "pat/error.hpp"

namespace pat::render {

Image::Image(int width, int height, double fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)) * 3, fill) {
  if (width <= 0 || height <= 0) throw ShapeError(fmt::format("image: bad size {}x{}", width, height));
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) throw ShapeError(fmt::format("image: bad size {}x{}", width, height));
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw ShapeError(fmt::format("image: {}x{}x3 needs {} values, got {}", width, height,
                                 static_cast<std::size_t>(width) * height * 3, data_.size()));
  }
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(fmt::format("cannot open '{}'", path.string()));
  return f;
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(fmt::format("'{}' is not a PNG file", path.string()));
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng: allocation failed");
  }
  std::vector<unsigned char> pixels;
  png_uint_32 width = 0, height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(fmt::format("'{}': corrupt PNG", path.string()));
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(fmt::format("'{}': unsupported PNG layout", path.string()));
  }
  pixels.resize(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<double> data(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) data[i] = pixels[i] / 255.0;
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

void save_png(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) throw Error("save_png: empty image");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng: allocation failed");
  }
  const auto w = static_cast<std::size_t>(image.width());
  const auto h = static_cast<std::size_t>(image.height());
  std::vector<unsigned char> pixels(w * h * 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(image.data()[i], 0.0, 1.0);
    pixels[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * 3;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(fmt::format("'{}': PNG write failed", path.string()));
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

diff::Tensor to_chw(const Image& image) {
  const int w = image.width(), h = image.height();
  diff::Tensor t({3, h, w});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        t[(static_cast<std::size_t>(c) * h + y) * w + x] = image.at(x, y, c);
      }
    }
  }
  return t;
}

Image from_chw(const diff::Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 3) {
    throw ShapeError(fmt::format("from_chw: expected [3,H,W], got {}", diff::shape_str(t.shape())));
  }
  const int h = t.dim(1), w = t.dim(2);
  Image img(w, h);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) img.at(x, y, c) = t[(static_cast<std::size_t>(c) * h + y) * w + x];
    }
  }
  return img;
}

double rms_distance(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError(fmt::format("rms_distance: {}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

void draw_box(Image& image, double x_min, double y_min, double x_max, double y_max, const Rgb& color) {
  const int w = image.width(), h = image.height();
  auto px = [](double v, int n) { return std::clamp(static_cast<int>(std::floor(v * n)), 0, n - 1); };
  const int x0 = px(x_min, w), x1 = px(x_max, w), y0 = px(y_min, h), y1 = px(y_max, h);
  for (int x = x0; x <= x1; ++x) {
    for (int c = 0; c < 3; ++c) {
      image.at(x, y0, c) = color[static_cast<std::size_t>(c)];
      image.at(x, y1, c) = color[static_cast<std::size_t>(c)];
    }
  }
  for (int y = y0; y <= y1; ++y) {
    for (int c = 0; c < 3; ++c) {
      image.at(x0, y, c) = color[static_cast<std::size_t>(c)];
      image.at(x1, y, c) = color[static_cast<std::size_t>(c)];
    }
  }
}

}  // namespace pat::render
