#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "pat/bbox.hpp"
#include "pat/diff/tape.hpp"
#include "pat/render/image.hpp"

namespace pat::tracker {

enum class Capacity : std::uint8_t { lg_lite = 0, sm_lite = 1 };

std::string_view capacity_name(Capacity c);
// Accepts "Lg-lite"/"lg_lite" and "Sm-lite"/"sm_lite".
Capacity parse_capacity(std::string_view name);

// Two conv layers per branch followed by two dense layers on the
// concatenated branch features.
struct Architecture {
  int crop = 64;
  int c1 = 16, k1 = 5, s1 = 2, p1 = 2;
  int c2 = 32, k2 = 3, s2 = 2, p2 = 1;
  int hidden = 128;

  int conv1_out() const { return (crop + 2 * p1 - k1) / s1 + 1; }
  int conv2_out() const { return (conv1_out() + 2 * p2 - k2) / s2 + 1; }
  int branch_features() const { return c2 * conv2_out() * conv2_out(); }
};

Architecture architecture(Capacity capacity, int crop_resolution);

// Parameter tensors in a fixed order:
//   template conv1 w/b, template conv2 w/b, search conv1 w/b, search conv2 w/b,
//   fc1 w/b, fc2 w/b.
struct TrackerWeights {
  Capacity capacity = Capacity::lg_lite;
  int crop_resolution = 64;
  std::vector<diff::Tensor> params;

  Architecture arch() const { return architecture(capacity, crop_resolution); }
  std::size_t parameter_count() const;
  // Shape check of every tensor against the architecture.
  void validate() const;
};

inline constexpr std::size_t kNumParams = 12;

TrackerWeights init_weights(Capacity capacity, int crop_resolution, std::uint64_t seed);

// Frame-relative region of size 2w x 2h centred on the previous box.
struct CropRegion {
  double center_x = 0.5;
  double center_y = 0.5;
  double width = 1.0;
  double height = 1.0;
};

CropRegion crop_region_from_bbox(const BBox& prev);
CropRegion full_frame_region();

// Differentiable crop of a [3, H, W] frame; returns [3, R, R]. Area outside
// the frame reads as zero.
diff::Var extract_crop(diff::Tape& tape, diff::Var frame_chw, const CropRegion& region, int resolution);
render::Image extract_crop(const render::Image& frame, const CropRegion& region, int resolution);

// Leaves for every parameter tensor.
std::vector<diff::Var> bind_weights(diff::Tape& tape, const TrackerWeights& weights, bool requires_grad);

// template and search are [N, 3, R, R]; returns sorted boxes [N, 4] in
// search-area coordinates (x_min, y_min, x_max, y_max).
diff::Var forward(diff::Tape& tape, const Architecture& arch, const std::vector<diff::Var>& params, diff::Var templ,
                  diff::Var search);

BBox predict(const TrackerWeights& weights, const render::Image& templ, const render::Image& search);

// search-relative -> frame-relative, clipped to [0, 1].
BBox bbox_to_frame(const BBox& pred, const CropRegion& region);
// frame-relative -> search-relative, clipped to [0, 1].
BBox frame_to_search(const BBox& box, const CropRegion& region);

}  // namespace pat::tracker
