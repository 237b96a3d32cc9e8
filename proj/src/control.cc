// Copyright 2026 The partrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "partrace/control.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace partrace {
namespace {

double param(const ScenarioSpec& spec, const std::string& name) {
  auto it = spec.controller.params.find(name);
  if (it == spec.controller.params.end()) {
    throw ScenarioError(ScenarioError::Kind::kValidation, "controller.params." + name,
                        "controller '" + spec.controller.kind + "' needs parameter '" + name + "'");
  }
  return it->second;
}

double param_or(const ScenarioSpec& spec, const std::string& name, double fallback) {
  auto it = spec.controller.params.find(name);
  return it == spec.controller.params.end() ? fallback : it->second;
}

std::vector<const Joint*> actuated_joints(const ScenarioSpec& spec) {
  std::vector<const Joint*> out;
  for (const Joint& j : spec.joints) {
    if (j.actuated) out.push_back(&j);
  }
  return out;
}

class ControllerBase : public Controller {
 public:
  explicit ControllerBase(const ScenarioSpec& expected)
      : expected_(expected), model_(expected), joints_(actuated_joints(expected)) {
    period_ = expected.steps_per_control() * expected.timestep;
  }

 protected:
  double time_of(int64_t tick) const { return static_cast<double>(tick) * period_; }

  // Packs per-coordinate generalized forces into a command for the
  // actuated joints, clamped to their effort limits.
  ControlCommand pack(int64_t tick, const Vector& force) const {
    ControlCommand cmd;
    cmd.tick = tick;
    for (const Joint* j : joints_) {
      double f = force[model_.joint_coordinate(j->id)];
      cmd.u.emplace_back(j->id, std::clamp(f, -j->effort_limit, j->effort_limit));
    }
    return cmd;
  }

  ScenarioSpec expected_;
  Multibody model_;
  std::vector<const Joint*> joints_;
  double period_ = 0.0;
};

class PassiveController final : public ControllerBase {
 public:
  using ControllerBase::ControllerBase;
  ControlCommand step(const SensorReading& reading) override {
    return pack(reading.tick, Vector::Zero(model_.dof()));
  }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<PassiveController>(expected_);
  }
};

// Joint-space PD on piecewise-linear waypoints.
class PdController final : public ControllerBase {
 public:
  explicit PdController(const ScenarioSpec& expected)
      : ControllerBase(expected), kp_(param(expected, "kp")), kd_(param(expected, "kd")) {}

  ControlCommand step(const SensorReading& reading) override {
    const double t = time_of(reading.tick);
    Vector force = Vector::Zero(model_.dof());
    for (const auto& [joint, points] : expected_.controller.trajectories) {
      const int c = model_.joint_coordinate(joint);
      double q_ref = points.back().second, qd_ref = 0.0;
      if (t <= points.front().first) {
        q_ref = points.front().second;
      } else {
        for (size_t i = 1; i < points.size(); ++i) {
          if (t <= points[i].first) {
            const auto& [t0, q0] = points[i - 1];
            const auto& [t1, q1] = points[i];
            qd_ref = (q1 - q0) / (t1 - t0);
            q_ref = q0 + qd_ref * (t - t0);
            break;
          }
        }
      }
      force[c] = kp_ * (q_ref - reading.observed_q[c]) + kd_ * (qd_ref - reading.observed_qdot[c]);
    }
    return pack(reading.tick, force);
  }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<PdController>(expected_);
  }

 private:
  double kp_, kd_;
};

// Two-foot gantry gait: each foot has a horizontal and a vertical prismatic
// coordinate (the vertical one is the foot centre height). Feet swing one at
// a time along quintic profiles; the vertical profile rises to
// foot_radius + step_height and comes back down, so the foot's lowest point
// clears the ground by step_height at the apex. Stance feet are commanded
// `press` below the ground to keep them loaded. Tracking uses computed
// torque on the expected model.
class StepperController final : public ControllerBase {
 public:
  explicit StepperController(const ScenarioSpec& expected) : ControllerBase(expected) {
    kp_ = param(expected, "kp");
    kd_ = param(expected, "kd");
    height_ = param(expected, "step_height");
    press_ = param_or(expected, "press", 0.0);
    margin_ = param_or(expected, "lift_margin", 0.0);
    if (!(margin_ >= 0.0 && margin_ < 0.5)) {
      throw ScenarioError(ScenarioError::Kind::kValidation, "controller.lift_margin",
                          "must lie in [0, 0.5)");
    }
    for (const char* side : {"lead", "trail"}) {
      Foot f;
      const std::string s = side;
      f.x = model_.joint_coordinate(role(s + "_x"));
      f.y = model_.joint_coordinate(role(s + "_y"));
      const Joint* yj = expected.find_joint(role(s + "_y"));
      const Body* foot = expected.find_body(yj->child);
      auto* disc = std::get_if<DiscShape>(&foot->shape);
      if (!disc) {
        throw ScenarioError(ScenarioError::Kind::kValidation, "controller.joints." + s + "_y",
                            "stepper feet must be discs");
      }
      f.radius = disc->radius;
      f.x0 = param(expected, s + "_x0");
      f.dx = param(expected, s + "_dx");
      f.t0 = param(expected, s + "_swing_start");
      f.t1 = param(expected, s + "_swing_end");
      feet_.push_back(f);
    }
  }

  ControlCommand step(const SensorReading& reading) override {
    const double t = time_of(reading.tick);
    // The command is held for a whole control period; aim the feedforward
    // at its midpoint.
    const double tm = t + 0.5 * period_;
    Vector accel = Vector::Zero(model_.dof());
    const Vector& q = reading.observed_q;
    const Vector& qd = reading.observed_qdot;
    for (const Foot& f : feet_) {
      Ref x = horizontal(f, t), y = vertical(f, t);
      Ref xm = horizontal(f, tm), ym = vertical(f, tm);
      accel[f.x] = xm.a + kp_ * (x.q - q[f.x]) + kd_ * (x.v - qd[f.x]);
      accel[f.y] = ym.a + kp_ * (y.q - q[f.y]) + kd_ * (y.v - qd[f.y]);
    }
    Dynamics dyn = model_.dynamics(q, qd);
    Vector force = dyn.mass * accel + dyn.bias - dyn.gravity;
    return pack(reading.tick, force);
  }

  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<StepperController>(expected_);
  }

 private:
  struct Foot {
    int x = 0, y = 0;
    double radius = 0.0, x0 = 0.0, dx = 0.0, t0 = 0.0, t1 = 0.0;
  };
  struct Ref {
    double q = 0.0, v = 0.0, a = 0.0;
  };

  const std::string& role(const std::string& name) const {
    auto it = expected_.controller.joints.find(name);
    if (it == expected_.controller.joints.end()) {
      throw ScenarioError(ScenarioError::Kind::kValidation, "controller.joints." + name,
                          "stepper needs joint role '" + name + "'");
    }
    return it->second;
  }

  static double phase(const Foot& f, double t) { return (t - f.t0) / (f.t1 - f.t0); }

  // The foot moves only vertically during the first and last `margin_` of
  // the swing, so it does not drag along the ground at liftoff and touchdown.
  Ref horizontal(const Foot& f, double t) const {
    const double w = 1.0 - 2.0 * margin_;
    const double s = (phase(f, t) - margin_) / w, d = (f.t1 - f.t0) * w;
    return {f.x0 + f.dx * smoothstep(s), f.dx * smoothstep_d1(s) / d,
            f.dx * smoothstep_d2(s) / (d * d)};
  }

  Ref vertical(const Foot& f, double t) const {
    const double low = f.radius - press_, high = f.radius + height_;
    const double s = phase(f, t), d = f.t1 - f.t0;
    if (s <= 0.0 || s >= 1.0) return {low, 0.0, 0.0};
    // Rise over the first half, fall over the second.
    const double u = s < 0.5 ? 2.0 * s : 2.0 * s - 1.0;
    const double span = s < 0.5 ? high - low : low - high;
    const double base = s < 0.5 ? low : high;
    const double rate = 2.0 / d;
    return {base + span * smoothstep(u), span * smoothstep_d1(u) * rate,
            span * smoothstep_d2(u) * rate * rate};
  }

  double kp_ = 0.0, kd_ = 0.0, height_ = 0.0, press_ = 0.0, margin_ = 0.0;
  std::vector<Foot> feet_;
};

}  // namespace

double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_d1(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 30.0 * u * u * (1.0 - u) * (1.0 - u);
}

double smoothstep_d2(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

SensorReading sense(const Vector& q, const Vector& qdot,
                    const std::vector<std::string>& coordinates,
                    const std::map<std::string, double>& applied_torque,
                    const JitterSample& jitter) {
  SensorReading r;
  r.tick = jitter.control_tick;
  r.observed_q = q;
  r.observed_qdot = qdot;
  for (size_t i = 0; i < coordinates.size(); ++i) {
    r.observed_q[i] += jitter.value("sensor.q." + coordinates[i]);
    r.observed_qdot[i] += jitter.value("sensor.qdot." + coordinates[i]);
  }
  for (const auto& [joint, torque] : applied_torque) {
    r.channels["sensor.torque." + joint] = torque + jitter.value("sensor.torque." + joint);
  }
  return r;
}

std::unique_ptr<Controller> make_controller(const ScenarioSpec& expected) {
  const std::string& kind = expected.controller.kind;
  if (kind == "passive") return std::make_unique<PassiveController>(expected);
  if (kind == "pd") return std::make_unique<PdController>(expected);
  if (kind == "stepper") return std::make_unique<StepperController>(expected);
  throw ScenarioError(ScenarioError::Kind::kValidation, "controller.kind",
                      "unknown controller kind '" + kind + "'");
}

int64_t LagLine::lag_steps(double lag, double timestep) {
  if (!(lag > 0.0)) return 0;
  // The small allowance keeps exact multiples (0.02 / 0.01) from rounding up.
  return static_cast<int64_t>(std::ceil(lag / timestep - 1e-9));
}

void LagLine::emit(int64_t emit_step, double lag, ControlCommand command) {
  int64_t apply = emit_step + lag_steps(lag, h_);
  apply = std::max(apply, last_apply_);
  last_apply_ = apply;
  queue_.emplace_back(apply, std::move(command));
}

const ControlCommand* LagLine::active(int64_t step) {
  while (!queue_.empty() && queue_.front().first <= step) {
    current_ = std::move(queue_.front().second);
    has_current_ = true;
    queue_.pop_front();
  }
  return has_current_ ? &current_ : nullptr;
}

const ControlCommand* LagLine::active_at(double now) {
  return active(static_cast<int64_t>(std::floor(now / h_ + 1e-9)));
}

}  // namespace partrace
