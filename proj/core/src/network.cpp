#include "pat/tracker/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "pat/error.hpp"
#include "pat/rng.hpp"

namespace pat::tracker {

using diff::Shape;
using diff::Tape;
using diff::Tensor;
using diff::Var;

std::string_view capacity_name(Capacity c) { return c == Capacity::lg_lite ? "Lg-lite" : "Sm-lite"; }

Capacity parse_capacity(std::string_view name) {
  if (name == "Lg-lite" || name == "lg_lite" || name == "lg") return Capacity::lg_lite;
  if (name == "Sm-lite" || name == "sm_lite" || name == "sm") return Capacity::sm_lite;
  throw ConfigError(fmt::format("unknown tracker capacity '{}' (expected Lg-lite or Sm-lite)", name));
}

Architecture architecture(Capacity capacity, int crop_resolution) {
  if (crop_resolution < 16) throw ConfigError(fmt::format("crop resolution {} too small (min 16)", crop_resolution));
  Architecture a;
  a.crop = crop_resolution;
  if (capacity == Capacity::sm_lite) {
    a.c1 = 12;
    a.k1 = 5;
    a.s1 = 4;
    a.p1 = 2;
    a.c2 = 24;
    a.k2 = 3;
    a.s2 = 2;
    a.p2 = 1;
    a.hidden = 64;
  }
  return a;
}

namespace {

std::array<Shape, kNumParams> param_shapes(const Architecture& a) {
  const Shape c1w{a.c1, 3, a.k1, a.k1}, c1b{a.c1}, c2w{a.c2, a.c1, a.k2, a.k2}, c2b{a.c2};
  return {c1w, c1b, c2w, c2b, c1w, c1b, c2w, c2b, Shape{a.hidden, 2 * a.branch_features()}, Shape{a.hidden},
          Shape{4, a.hidden}, Shape{4}};
}

}  // namespace

std::size_t TrackerWeights::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : params) n += t.size();
  return n;
}

void TrackerWeights::validate() const {
  const auto shapes = param_shapes(arch());
  if (params.size() != kNumParams) {
    throw ShapeError(fmt::format("tracker weights: expected {} tensors, got {}", kNumParams, params.size()));
  }
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (params[i].shape() != shapes[i]) {
      throw ShapeError(fmt::format("tracker weights: tensor {} has shape {}, {} at crop {} expects {}", i,
                                   diff::shape_str(params[i].shape()), capacity_name(capacity), crop_resolution,
                                   diff::shape_str(shapes[i])));
    }
  }
}

TrackerWeights init_weights(Capacity capacity, int crop_resolution, std::uint64_t seed) {
  TrackerWeights w;
  w.capacity = capacity;
  w.crop_resolution = crop_resolution;
  const auto shapes = param_shapes(w.arch());
  Rng rng(seed);
  for (std::size_t i = 0; i < kNumParams; ++i) {
    Tensor t(shapes[i], 0.0);
    if (t.rank() > 1) {
      // He initialization; fan-in is everything but the leading axis.
      const double fan_in = static_cast<double>(t.size()) / t.dim(0);
      double std = std::sqrt(2.0 / fan_in);
      if (i == 10) std = 0.1 / std::sqrt(fan_in);  // keep the initial head close to its bias
      std::normal_distribution<double> normal(0.0, std);
      for (double& v : t.data()) v = normal(rng);
    }
    w.params.push_back(std::move(t));
  }
  // Start at the "target did not move" box (0.25, 0.25, 0.75, 0.75).
  const double logit = std::log(3.0);
  w.params[11] = Tensor::from({-logit, -logit, logit, logit});
  return w;
}

CropRegion crop_region_from_bbox(const BBox& prev) {
  if (!(prev.width() > 0.0) || !(prev.height() > 0.0)) {
    throw Error(fmt::format("crop_region_from_bbox: box {} has zero area", prev.str()));
  }
  return {prev.center_x(), prev.center_y(), 2.0 * prev.width(), 2.0 * prev.height()};
}

CropRegion full_frame_region() { return {0.5, 0.5, 1.0, 1.0}; }

Var extract_crop(Tape& tape, Var frame_chw, const CropRegion& region, int resolution) {
  if (resolution <= 0) throw ShapeError(fmt::format("extract_crop: resolution {} must be positive", resolution));
  const Tensor& f = tape.value(frame_chw);
  if (f.rank() != 3) throw ShapeError(fmt::format("extract_crop: frame must be [3,H,W], got {}", diff::shape_str(f.shape())));
  const double w = f.dim(2), h = f.dim(1);
  const diff::CropWindow win{(region.center_x - 0.5 * region.width) * w, (region.center_y - 0.5 * region.height) * h,
                             region.width * w, region.height * h};
  return tape.crop(frame_chw, win, resolution, resolution);
}

render::Image extract_crop(const render::Image& frame, const CropRegion& region, int resolution) {
  Tape tape;
  const Var f = tape.leaf(render::to_chw(frame));
  return render::from_chw(tape.value(extract_crop(tape, f, region, resolution)));
}

std::vector<Var> bind_weights(Tape& tape, const TrackerWeights& weights, bool requires_grad) {
  weights.validate();
  std::vector<Var> vars;
  vars.reserve(kNumParams);
  for (const Tensor& t : weights.params) vars.push_back(tape.leaf(t, requires_grad));
  return vars;
}

Var forward(Tape& tape, const Architecture& arch, const std::vector<Var>& p, Var templ, Var search) {
  if (p.size() != kNumParams) throw ShapeError(fmt::format("forward: expected {} parameters, got {}", kNumParams, p.size()));
  const Shape& ts = tape.value(templ).shape();
  const Shape& ss = tape.value(search).shape();
  const Shape want{ts.empty() ? 0 : ts[0], 3, arch.crop, arch.crop};
  if (ts != want || ss != want) {
    throw ShapeError(fmt::format("forward: template {} and search {} must both be {}", diff::shape_str(ts),
                                 diff::shape_str(ss), diff::shape_str(want)));
  }
  const int n = ts[0];
  auto branch = [&](Var x, std::size_t base) {
    Var h = tape.relu(tape.conv2d(x, p[base], p[base + 1], arch.s1, arch.p1));
    h = tape.relu(tape.conv2d(h, p[base + 2], p[base + 3], arch.s2, arch.p2));
    return tape.reshape(h, {n, arch.branch_features()});
  };
  const std::array<Var, 2> feats{branch(templ, 0), branch(search, 4)};
  Var h = tape.concat(feats, 1);
  h = tape.relu(tape.linear(h, p[8], p[9]));
  const Var raw = tape.sigmoid(tape.linear(h, p[10], p[11]));

  // Sort each coordinate pair: min = (a + b - |a - b|) / 2, max = (a + b + |a - b|) / 2.
  auto ordered = [&](int ia, int ib) {
    const Var a = tape.slice(raw, 1, ia, ia + 1);
    const Var b = tape.slice(raw, 1, ib, ib + 1);
    const Var s = tape.add(a, b);
    const Var d = tape.abs(tape.sub(a, b));
    return std::array<Var, 2>{tape.scale(tape.sub(s, d), 0.5), tape.scale(tape.add(s, d), 0.5)};
  };
  const auto xs = ordered(0, 2);
  const auto ys = ordered(1, 3);
  const std::array<Var, 4> cols{xs[0], ys[0], xs[1], ys[1]};
  return tape.concat(cols, 1);
}

BBox predict(const TrackerWeights& weights, const render::Image& templ, const render::Image& search) {
  const int r = weights.crop_resolution;
  if (templ.width() != r || templ.height() != r || search.width() != r || search.height() != r) {
    throw ShapeError(fmt::format("predict: crops {}x{} and {}x{} must match the tracker resolution {}", templ.width(),
                                 templ.height(), search.width(), search.height(), r));
  }
  Tape tape;
  const auto params = bind_weights(tape, weights, false);
  const Var t = tape.leaf(render::to_chw(templ).reshaped({1, 3, r, r}));
  const Var s = tape.leaf(render::to_chw(search).reshaped({1, 3, r, r}));
  const Tensor& out = tape.value(forward(tape, weights.arch(), params, t, s));
  return {out[0], out[1], out[2], out[3], BoxFrame::search_relative};
}

namespace {
double clip01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

BBox bbox_to_frame(const BBox& pred, const CropRegion& region) {
  const double x0 = region.center_x - 0.5 * region.width;
  const double y0 = region.center_y - 0.5 * region.height;
  return {clip01(x0 + pred.x_min * region.width), clip01(y0 + pred.y_min * region.height),
          clip01(x0 + pred.x_max * region.width), clip01(y0 + pred.y_max * region.height), BoxFrame::frame_relative};
}

BBox frame_to_search(const BBox& box, const CropRegion& region) {
  const double x0 = region.center_x - 0.5 * region.width;
  const double y0 = region.center_y - 0.5 * region.height;
  return {clip01((box.x_min - x0) / region.width), clip01((box.y_min - y0) / region.height),
          clip01((box.x_max - x0) / region.width), clip01((box.y_max - y0) / region.height),
          BoxFrame::search_relative};
}

}  // namespace pat::tracker
