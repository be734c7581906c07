#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pat/bbox.hpp"
#include "pat/render/geometry.hpp"
#include "pat/render/image.hpp"
#include "pat/render/lighting.hpp"
#include "pat/render/sprites.hpp"

namespace pat::render {

struct CameraModel {
  Pose6D pose;
  double horizontal_fov = 60.0;  // degrees
  int frame_width = 128;
  int frame_height = 128;

  void validate() const;
  // Focal length in pixels; pixels are square.
  double focal_px() const;
};

// A vertical textured plane. pose is the centre of the plane; with zero
// yaw its visible face looks toward -y.
struct PosterSpec {
  Pose6D pose{0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
  double width_m = 2.6;
  double height_m = 2.0;
  int texture_resolution = 128;

  void validate() const;
};

// Camera-facing billboard standing at pose (feet on the ground). The body
// yaw only changes the silhouette (profile vs frontal, front vs back).
struct TargetSprite {
  TargetIdentity identity = TargetIdentity::green_person;
  Pose6D pose;
  double height_m = 1.75;
};

struct SceneSpec {
  CameraModel camera;
  PosterSpec poster;
  TargetSprite sprite;
  Background background = Background::school;
  LightSpec light;
  double ambient_fraction = 0.2;
};

enum class PixelSource : std::uint8_t { background, poster, sprite };

// Where a frame pixel came from. For poster samples (including sprite
// pixels covering the poster, flagged occluded) `texel` holds the four
// bilinear source texels as y * texture_width + x and `weight` their
// sampling weights.
struct PixelRecord {
  PixelSource source = PixelSource::background;
  bool occluded = false;
  std::array<int, 4> texel{-1, -1, -1, -1};
  std::array<double, 4> weight{0.0, 0.0, 0.0, 0.0};
};

struct RenderOutput {
  Image frame;
  std::optional<BBox> gt_bbox;  // empty when no sprite pixel is in view
  std::vector<PixelRecord> projection_map;  // row-major, one per frame pixel
  std::vector<std::uint8_t> saturated;      // H*W*3, shading was clamped
  LightingParams lighting;
  int texture_width = 0;
  int texture_height = 0;
};

// Maps texture unit coordinates (u right, v down, homogeneous) to frame
// pixel coordinates, where pixel (i, j) covers [j, j+1) x [i, i+1).
// Throws DegenerateViewError when the poster is behind the camera or
// edge-on.
Mat3 poster_homography(const CameraModel& camera, const PosterSpec& poster);

// Painter's order background -> poster -> sprite. Poster texels are sampled
// bilinearly and every source is shaded by the same lighting.
RenderOutput render_scene(const SceneSpec& scene, const Texture& texture);

// Chains dLoss/dFrame (H x W x 3) back onto the texture through the
// recorded projection. Only unoccluded, unsaturated poster pixels
// contribute.
Image backproject_gradient(const Image& frame_grad, const RenderOutput& out);

}  // namespace pat::render
