#include "pat/tracker/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pat/error.hpp"
#include "pat/render/textures.hpp"
#include "pat/tracker/network.hpp"

namespace pat::tracker {

namespace {

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

void pack(const render::Image& img, std::vector<std::uint8_t>& store) {
  const int r = img.width();
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) store.push_back(quantize(img.at(x, y, c)));
}

}  // namespace

TrackingDataset::TrackingDataset(int resolution) : resolution_(resolution) {
  if (resolution <= 0) throw ShapeError(fmt::format("dataset: resolution {} must be positive", resolution));
}

void TrackingDataset::add(const render::Image& templ, const render::Image& search, const BBox& gt) {
  for (const render::Image* img : {&templ, &search}) {
    if (img->width() != resolution_ || img->height() != resolution_) {
      throw ShapeError(fmt::format("dataset: crop {}x{} does not match resolution {}", img->width(), img->height(),
                                   resolution_));
    }
  }
  pack(templ, templ_);
  pack(search, search_);
  gt_.push_back(gt);
}

render::Image TrackingDataset::unpack(const std::vector<std::uint8_t>& store, std::size_t i) const {
  const auto plane = static_cast<std::size_t>(resolution_) * resolution_;
  const std::uint8_t* src = store.data() + i * 3 * plane;
  render::Image img(resolution_, resolution_);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < resolution_; ++y)
      for (int x = 0; x < resolution_; ++x)
        img.at(x, y, c) = src[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y * resolution_ + x)] / 255.0;
  return img;
}

render::Image TrackingDataset::template_image(std::size_t i) const { return unpack(templ_, i); }
render::Image TrackingDataset::search_image(std::size_t i) const { return unpack(search_, i); }

void TrackingDataset::fill_batch(std::span<const std::size_t> indices, std::span<const std::uint8_t> flip,
                                 diff::Tensor& templ, diff::Tensor& search, diff::Tensor& gt) const {
  if (flip.size() != indices.size()) throw ShapeError("fill_batch: flip flags must match indices");
  const int n = static_cast<int>(indices.size());
  const int r = resolution_;
  const auto plane = static_cast<std::size_t>(r) * r;
  templ = diff::Tensor({n, 3, r, r});
  search = diff::Tensor({n, 3, r, r});
  gt = diff::Tensor({n, 4});
  for (int k = 0; k < n; ++k) {
    const std::size_t i = indices[static_cast<std::size_t>(k)];
    if (i >= size()) throw Error(fmt::format("fill_batch: index {} out of range ({} samples)", i, size()));
    const bool f = flip[static_cast<std::size_t>(k)] != 0;
    for (auto [store, out] : {std::pair{&templ_, &templ}, std::pair{&search_, &search}}) {
      const std::uint8_t* src = store->data() + i * 3 * plane;
      double* dst = out->ptr() + static_cast<std::size_t>(k) * 3 * plane;
      for (std::size_t c = 0; c < 3; ++c) {
        for (int y = 0; y < r; ++y) {
          const std::uint8_t* row = src + c * plane + static_cast<std::size_t>(y * r);
          double* orow = dst + c * plane + static_cast<std::size_t>(y * r);
          for (int x = 0; x < r; ++x) orow[x] = row[f ? r - 1 - x : x] / 255.0;
        }
      }
    }
    const BBox& b = gt_[i];
    double* g = gt.ptr() + static_cast<std::size_t>(k) * 4;
    g[0] = f ? 1.0 - b.x_max : b.x_min;
    g[1] = b.y_min;
    g[2] = f ? 1.0 - b.x_min : b.x_max;
    g[3] = b.y_max;
  }
}

TrackingDataset synth_tracking_dataset(const attack::SceneDistribution& dist, int n_pairs, std::uint64_t seed,
                                       int resolution) {
  if (n_pairs <= 0) throw ConfigError(fmt::format("dataset: n_pairs {} must be positive", n_pairs));
  dist.validate();
  TrackingDataset ds(resolution);
  constexpr int kMaxAttempts = 100;
  for (int i = 0; i < n_pairs; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    bool done = false;
    for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
      const attack::ScenePair pair = attack::sample_scene_pair(dist, rng);
      const render::Texture tex = render::inert_texture(dist.poster.texture_resolution, rng);
      attack::RenderedPair r;
      try {
        r = attack::render_pair(pair, tex);
      } catch (const DegenerateViewError&) {
        continue;
      }
      if (!r.previous.gt_bbox || !r.current.gt_bbox) continue;
      const CropRegion region = crop_region_from_bbox(*r.previous.gt_bbox);
      ds.add(extract_crop(r.previous.frame, region, resolution), extract_crop(r.current.frame, region, resolution),
             frame_to_search(*r.current.gt_bbox, region));
      done = true;
    }
    if (!done) {
      throw ConfigError(fmt::format("dataset: no visible target after {} draws for pair {}; check the scene ranges",
                                    kMaxAttempts, i));
    }
  }
  return ds;
}

}  // namespace pat::tracker
