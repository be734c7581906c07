#include "pat/eval/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::eval {

double area(const BBox& b) { return std::max(0.0, b.width()) * std::max(0.0, b.height()); }

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = area(a) + area(b) - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_pixel_oracle(const BBox& a, const BBox& b, int grid) {
  if (grid <= 0) throw Error(fmt::format("iou_pixel_oracle: grid {} must be positive", grid));
  auto inside = [](const BBox& box, double x, double y) {
    return x >= box.x_min && x < box.x_max && y >= box.y_min && y < box.y_max;
  };
  long long inter = 0, uni = 0;
  for (int i = 0; i < grid; ++i) {
    const double y = (i + 0.5) / grid;
    for (int j = 0; j < grid; ++j) {
      const double x = (j + 0.5) / grid;
      const bool ia = inside(a, x, y), ib = inside(b, x, y);
      inter += (ia && ib) ? 1 : 0;
      uni += (ia || ib) ? 1 : 0;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mu_ioud(std::span<const BBox> pred_inert, std::span<const BBox> pred_adv, std::span<const BBox> gt) {
  if (pred_inert.size() != pred_adv.size() || pred_inert.size() != gt.size()) {
    throw Error(fmt::format("mu_ioud: length mismatch (inert {}, adversarial {}, gt {})", pred_inert.size(),
                            pred_adv.size(), gt.size()));
  }
  if (gt.empty()) throw Error("mu_ioud: empty sequence");
  double s_inert = 0.0, s_adv = 0.0;
  for (std::size_t j = 0; j < gt.size(); ++j) {
    s_inert += iou(pred_inert[j], gt[j]);
    s_adv += iou(pred_adv[j], gt[j]);
  }
  const double n = static_cast<double>(gt.size());
  return s_inert / n - s_adv / n;
}

}  // namespace pat::eval
