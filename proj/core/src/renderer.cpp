#include "pat/render/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::render {

void CameraModel::validate() const {
  if (!(horizontal_fov > 0.0 && horizontal_fov < 180.0)) {
    throw ConfigError(fmt::format("camera fov {} outside (0,180)", horizontal_fov));
  }
  if (frame_width <= 0 || frame_height <= 0) {
    throw ConfigError(fmt::format("camera frame {}x{} must be positive", frame_width, frame_height));
  }
}

double CameraModel::focal_px() const {
  return 0.5 * frame_width / std::tan(0.5 * horizontal_fov * kDegToRad);
}

void PosterSpec::validate() const {
  if (!(width_m > 0.0) || !(height_m > 0.0)) {
    throw ConfigError(fmt::format("poster size {}x{} m must be positive", width_m, height_m));
  }
  if (texture_resolution <= 0) throw ConfigError("poster texture resolution must be positive");
}

namespace {

struct CameraFrame {
  Vec3 center;
  Basis basis;
  double f;
  double cx, cy;

  // World point -> camera coordinates (x right, y down, z forward).
  Vec3 to_camera(Vec3 p) const {
    const Vec3 d = p - center;
    return {dot(basis.right, d), -dot(basis.up, d), dot(basis.forward, d)};
  }
  Vec3 ray(double px, double py) const {
    return basis.right * ((px - cx) / f) - basis.up * ((py - cy) / f) + basis.forward;
  }
};

CameraFrame camera_frame(const CameraModel& cam) {
  return {cam.pose.position(), orientation(cam.pose), cam.focal_px(), 0.5 * cam.frame_width,
          0.5 * cam.frame_height};
}

}  // namespace

Mat3 poster_homography(const CameraModel& camera, const PosterSpec& poster) {
  camera.validate();
  poster.validate();
  const CameraFrame cf = camera_frame(camera);
  const Basis pb = orientation(poster.pose);
  const Vec3 center = poster.pose.position();
  const Vec3 top_left = center - (0.5 * poster.width_m) * pb.right + (0.5 * poster.height_m) * pb.up;
  const Vec3 eu = poster.width_m * pb.right;
  const Vec3 ev = -poster.height_m * pb.up;

  const Vec3 corners[4] = {top_left, top_left + eu, top_left + ev, top_left + eu + ev};
  bool any_in_front = false;
  for (const Vec3& c : corners) {
    if (cf.to_camera(c).z > 1e-6) any_in_front = true;
  }
  if (!any_in_front) throw DegenerateViewError("poster lies entirely behind the camera");

  const Vec3 col_u{dot(cf.basis.right, eu), -dot(cf.basis.up, eu), dot(cf.basis.forward, eu)};
  const Vec3 col_v{dot(cf.basis.right, ev), -dot(cf.basis.up, ev), dot(cf.basis.forward, ev)};
  const Vec3 col_t = cf.to_camera(top_left);

  Mat3 rt{{col_u.x, col_v.x, col_t.x, col_u.y, col_v.y, col_t.y, col_u.z, col_v.z, col_t.z}};
  const Mat3 k{{cf.f, 0.0, cf.cx, 0.0, cf.f, cf.cy, 0.0, 0.0, 1.0}};
  const Mat3 h = k * rt;

  double frob = 0.0;
  for (double v : h.m) frob += v * v;
  frob = std::sqrt(frob);
  Mat3 hn = h;
  for (double& v : hn.m) v /= frob;
  if (!(std::fabs(hn.determinant()) >= 1e-9)) {
    throw DegenerateViewError(fmt::format("poster seen edge-on (normalized |det| = {:.3g})", std::fabs(hn.determinant())));
  }
  return h;
}

RenderOutput render_scene(const SceneSpec& scene, const Texture& texture) {
  const CameraModel& cam = scene.camera;
  const Mat3 hom = poster_homography(cam, scene.poster);
  const Mat3 inv = hom.inverse();
  const CameraFrame cf = camera_frame(cam);
  if (texture.empty()) throw ShapeError("render_scene: empty texture");
  if (!(scene.sprite.height_m > 0.0)) throw ConfigError("sprite height must be positive");

  const int w = cam.frame_width, h = cam.frame_height;
  const int tw = texture.width(), th = texture.height();

  RenderOutput out;
  out.frame = Image(w, h);
  out.projection_map.assign(static_cast<std::size_t>(w) * h, PixelRecord{});
  out.saturated.assign(static_cast<std::size_t>(w) * h * 3, 0);
  out.lighting = light_params_from_spec(scene.light, scene.ambient_fraction);
  out.texture_width = tw;
  out.texture_height = th;

  // Billboard plane through the feet, turned toward the camera about +z.
  const Vec3 feet = scene.sprite.pose.position();
  Vec3 normal{cf.center.x - feet.x, cf.center.y - feet.y, 0.0};
  const double nlen = norm(normal);
  normal = nlen > 1e-9 ? (1.0 / nlen) * normal : Vec3{0.0, -1.0, 0.0};
  const Vec3 lateral = normalized(cross(Vec3{0.0, 0.0, 1.0}, normal));
  const double sprite_h = scene.sprite.height_m;
  const double plane_d = dot(normal, feet - cf.center);

  int min_x = w, min_y = h, max_x = -1, max_y = -1;

  for (int i = 0; i < h; ++i) {
    const double py = i + 0.5;
    for (int j = 0; j < w; ++j) {
      const double px = j + 0.5;
      PixelRecord& rec = out.projection_map[static_cast<std::size_t>(i) * w + j];
      const Vec3 dir = cf.ray(px, py);
      Rgb color = background_color(scene.background, dir);

      const Vec3 q = inv * Vec3{px, py, 1.0};
      bool on_poster = false;
      if (q.z > 0.0) {
        const double u = q.x / q.z, v = q.y / q.z;
        if (u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0) {
          on_poster = true;
          const double sx = std::clamp(u * tw - 0.5, 0.0, static_cast<double>(tw - 1));
          const double sy = std::clamp(v * th - 0.5, 0.0, static_cast<double>(th - 1));
          const int x0 = std::min(static_cast<int>(sx), tw - 1), y0 = std::min(static_cast<int>(sy), th - 1);
          const int x1 = std::min(x0 + 1, tw - 1), y1 = std::min(y0 + 1, th - 1);
          const double fx = sx - x0, fy = sy - y0;
          rec.source = PixelSource::poster;
          rec.texel = {y0 * tw + x0, y0 * tw + x1, y1 * tw + x0, y1 * tw + x1};
          rec.weight = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
          for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) {
              const auto t = static_cast<std::size_t>(rec.texel[static_cast<std::size_t>(k)]);
              s += rec.weight[static_cast<std::size_t>(k)] * texture.data()[t * 3 + static_cast<std::size_t>(c)];
            }
            color[static_cast<std::size_t>(c)] = s;
          }
        }
      }

      const double denom = dot(normal, dir);
      if (std::fabs(denom) > 1e-12) {
        const double t = plane_d / denom;
        if (t > 0.0) {
          const Vec3 hit = cf.center + t * dir;
          const double u = dot(hit - feet, lateral) / sprite_h;
          const double v = (hit.z - feet.z) / sprite_h;
          if (auto sc = sprite_texel(scene.sprite.identity, u, v, scene.sprite.pose.yaw)) {
            color = *sc;
            rec.source = PixelSource::sprite;
            rec.occluded = on_poster;
            min_x = std::min(min_x, j);
            max_x = std::max(max_x, j);
            min_y = std::min(min_y, i);
            max_y = std::max(max_y, i);
          }
        }
      }

      for (int c = 0; c < 3; ++c) {
        const double pre = out.lighting.shade(color[static_cast<std::size_t>(c)], c);
        const std::size_t idx = (static_cast<std::size_t>(i) * w + j) * 3 + static_cast<std::size_t>(c);
        if (pre < 0.0 || pre > 1.0) out.saturated[idx] = 1;
        out.frame.data()[idx] = std::clamp(pre, 0.0, 1.0);
      }
    }
  }

  if (max_x >= 0) {
    out.gt_bbox = BBox{static_cast<double>(min_x) / w, static_cast<double>(min_y) / h,
                       static_cast<double>(max_x + 1) / w, static_cast<double>(max_y + 1) / h,
                       BoxFrame::frame_relative};
  }
  return out;
}

Image backproject_gradient(const Image& frame_grad, const RenderOutput& out) {
  if (frame_grad.width() != out.frame.width() || frame_grad.height() != out.frame.height()) {
    throw ShapeError(fmt::format("backproject_gradient: gradient {}x{} does not match frame {}x{}",
                                 frame_grad.width(), frame_grad.height(), out.frame.width(), out.frame.height()));
  }
  Image tex_grad(out.texture_width, out.texture_height, 0.0);
  auto& tg = tex_grad.data();
  const auto& fg = frame_grad.data();
  for (std::size_t p = 0; p < out.projection_map.size(); ++p) {
    const PixelRecord& rec = out.projection_map[p];
    if (rec.source != PixelSource::poster || rec.occluded) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      if (out.saturated[p * 3 + c]) continue;
      const double g = fg[p * 3 + c] * out.lighting.gain[c];
      if (g == 0.0) continue;
      for (std::size_t k = 0; k < 4; ++k) {
        tg[static_cast<std::size_t>(rec.texel[k]) * 3 + c] += rec.weight[k] * g;
      }
    }
  }
  return tex_grad;
}

}  // namespace pat::render
