#include "pat/bbox.hpp"

#include <fmt/format.h>

namespace pat {

bool BBox::valid() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  return unit(x_min) && unit(y_min) && unit(x_max) && unit(y_max) && x_min <= x_max && y_min <= y_max;
}

std::string BBox::str() const {
  return fmt::format("{{({:.4f},{:.4f}),({:.4f},{:.4f})}}", x_min, y_min, x_max, y_max);
}

}  // namespace pat
