#pragma once

#include <string>

namespace pat {

enum class BoxFrame { frame_relative, search_relative };

// Normalized corner pair {(x_min, y_min), (x_max, y_max)}.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  BoxFrame frame = BoxFrame::frame_relative;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  // Ordered corners inside [0, 1]^4.
  bool valid() const;
  std::string str() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

}  // namespace pat
