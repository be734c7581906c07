#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "pat/diff/tensor.hpp"

namespace pat::render {

using Rgb = std::array<double, 3>;

// Interleaved RGB, row-major (H x W x 3), values nominally in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3 +
           static_cast<std::size_t>(c);
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// The attack variable: a square RGB image in [0, 1].
using Texture = Image;

// 8-bit PNG I/O. Saving quantizes round(255 v) after clamping to [0, 1];
// loading dequantizes as v / 255. Grayscale and alpha inputs are converted.
Image load_png(const std::filesystem::path& path);
void save_png(const Image& image, const std::filesystem::path& path);

// [3, H, W] planar tensor <-> interleaved image.
diff::Tensor to_chw(const Image& image);
Image from_chw(const diff::Tensor& tensor);

// Root-mean-square difference over all channels; images must match in size.
double rms_distance(const Image& a, const Image& b);

// Draws a 1-pixel rectangle outline (frame-relative normalized coordinates).
void draw_box(Image& image, double x_min, double y_min, double x_max, double y_max, const Rgb& color);

}  // namespace pat::render
