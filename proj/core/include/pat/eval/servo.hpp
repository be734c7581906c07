#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pat/attack/scene_distribution.hpp"
#include "pat/tracker/network.hpp"

namespace pat::eval {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

class PidController {
 public:
  PidController() = default;
  PidController(PidGains gains, double integral_limit) : gains_(gains), limit_(integral_limit) {}

  // The integral term is clamped to +-integral_limit.
  double update(double error, double dt);
  double integral() const { return integral_; }

 private:
  PidGains gains_;
  double limit_ = 1.0;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool first_ = true;
};

struct ServoConfig {
  PidGains lateral{1.5, 0.3, 0.0};   // horizontal box-centre error -> sideways velocity
  PidGains forward{4.0, 0.5, 0.0};   // sqrt-area error -> forward velocity
  PidGains vertical{1.0, 0.1, 0.0};  // vertical box-centre error -> vertical velocity
  double integral_limit = 1.0;
  int n_steps = 100;
  double dt = 0.1;                      // seconds per step
  render::Pose6D target_velocity{0.25, 0.0, 0.0, 0.0, 0.0, 0.0};  // per second
  attack::Range bounds_x{-8.0, 8.0};   // camera must stay inside this volume
  attack::Range bounds_y{-25.0, -0.5};
  attack::Range bounds_z{0.1, 5.0};
};

struct ServoStep {
  int step = 0;
  render::Pose6D camera;
  render::Pose6D target;
  BBox pred;                // frame-relative
  std::optional<BBox> gt;   // empty when the target left the view
  double iou = 0.0;
};

struct ServoResult {
  std::vector<ServoStep> trajectory;
  bool breakaway = false;    // mean IOU over the final 10 steps < 0.1
  bool terminated = false;   // camera left the bounding volume
  std::string termination_reason;
};

// Closed loop: render, chained predict, PID on the box centre and
// sqrt(area) relative to the first frame's box, integrate the camera
// position along its own right/forward/up axes.
ServoResult servo_sim(const tracker::TrackerWeights& weights, const render::SceneSpec& initial,
                      const render::Texture& texture, const ServoConfig& config = {});

}  // namespace pat::eval
