#include "pat/eval/servo.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pat/error.hpp"
#include "pat/eval/metrics.hpp"

namespace pat::eval {

using render::Pose6D;

double PidController::update(double error, double dt) {
  integral_ = std::clamp(integral_ + error * dt, -limit_, limit_);
  const double deriv = first_ ? 0.0 : (error - prev_error_) / dt;
  first_ = false;
  prev_error_ = error;
  return gains_.kp * error + gains_.ki * integral_ + gains_.kd * deriv;
}

ServoResult servo_sim(const tracker::TrackerWeights& weights, const render::SceneSpec& initial,
                      const render::Texture& texture, const ServoConfig& config) {
  if (config.n_steps < 1) throw ConfigError(fmt::format("servo.n_steps {} must be >= 1", config.n_steps));
  if (!(config.dt > 0.0)) throw ConfigError("servo.dt must be positive");
  for (const PidGains* g : {&config.lateral, &config.forward, &config.vertical}) {
    if (!std::isfinite(g->kp) || !std::isfinite(g->ki) || !std::isfinite(g->kd)) {
      throw ConfigError("servo gains must be finite");
    }
  }

  render::SceneSpec scene = initial;
  render::RenderOutput first = render::render_scene(scene, texture);
  if (!first.gt_bbox) throw Error("servo_sim: target not visible in the initial frame");
  const BBox desired = *first.gt_bbox;
  const double desired_size = std::sqrt(area(desired));

  PidController lateral(config.lateral, config.integral_limit);
  PidController forward(config.forward, config.integral_limit);
  PidController vertical(config.vertical, config.integral_limit);

  ServoResult result;
  render::Image prev_frame = std::move(first.frame);
  BBox last = desired;
  tracker::CropRegion region = tracker::crop_region_from_bbox(desired);
  const int r = weights.crop_resolution;

  for (int k = 1; k <= config.n_steps; ++k) {
    // Control from the latest estimate, then advance the world one step.
    const double e_lat = last.center_x() - desired.center_x();
    const double e_fwd = desired_size - std::sqrt(area(last));
    const double e_ver = last.center_y() - desired.center_y();
    const double v_lat = lateral.update(e_lat, config.dt);
    const double v_fwd = forward.update(e_fwd, config.dt);
    const double v_ver = vertical.update(e_ver, config.dt);

    const render::Basis basis = render::orientation(scene.camera.pose);
    const render::Vec3 flat_fwd = render::normalized(render::Vec3{basis.forward.x, basis.forward.y, 0.0});
    const render::Vec3 flat_right = render::normalized(render::Vec3{basis.right.x, basis.right.y, 0.0});
    const render::Vec3 move = config.dt * (v_lat * flat_right + v_fwd * flat_fwd + render::Vec3{0.0, 0.0, -v_ver});
    scene.camera.pose.x += move.x;
    scene.camera.pose.y += move.y;
    scene.camera.pose.z += move.z;
    const Pose6D& tv = config.target_velocity;
    scene.sprite.pose = scene.sprite.pose + Pose6D{tv.x * config.dt, tv.y * config.dt, tv.z * config.dt,
                                                   tv.roll * config.dt, tv.pitch * config.dt, tv.yaw * config.dt};

    const Pose6D& c = scene.camera.pose;
    if (!config.bounds_x.contains(c.x) || !config.bounds_y.contains(c.y) || !config.bounds_z.contains(c.z)) {
      result.terminated = true;
      result.termination_reason =
          fmt::format("step {}: camera at ({:.2f}, {:.2f}, {:.2f}) left the bounding volume", k, c.x, c.y, c.z);
      break;
    }

    render::RenderOutput out;
    try {
      out = render::render_scene(scene, texture);
    } catch (const DegenerateViewError& e) {
      result.terminated = true;
      result.termination_reason = fmt::format("step {}: {}", k, e.what());
      break;
    }
    const render::Image templ = tracker::extract_crop(prev_frame, region, r);
    const render::Image search = tracker::extract_crop(out.frame, region, r);
    const BBox pred = tracker::bbox_to_frame(tracker::predict(weights, templ, search), region);
    if (pred.width() > 1e-6 && pred.height() > 1e-6) {
      region = tracker::crop_region_from_bbox(pred);
      last = pred;
    }

    ServoStep step;
    step.step = k;
    step.camera = scene.camera.pose;
    step.target = scene.sprite.pose;
    step.pred = pred;
    step.gt = out.gt_bbox;
    step.iou = out.gt_bbox ? iou(pred, *out.gt_bbox) : 0.0;
    result.trajectory.push_back(step);
    prev_frame = std::move(out.frame);
  }

  const std::size_t n = result.trajectory.size();
  const std::size_t tail = std::min<std::size_t>(10, n);
  double s = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) s += result.trajectory[i].iou;
  result.breakaway = tail == 0 || s / static_cast<double>(tail) < 0.1;
  return result;
}

}  // namespace pat::eval
