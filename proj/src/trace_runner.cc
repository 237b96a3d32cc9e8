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

#include "partrace/trace_runner.h"

#include <chrono>
#include <cmath>
#include <optional>

namespace partrace {
namespace {

TelemetryRow row_of(const SimState& s) {
  return {s.t, std::vector<double>(s.q.data(), s.q.data() + s.q.size()),
          std::vector<double>(s.qdot.data(), s.qdot.data() + s.qdot.size())};
}

bool pair_matches(const ContactEvent& e, const std::string& a, const std::string& b) {
  return (e.pair_a == a && e.pair_b == b) || (e.pair_a == b && e.pair_b == a);
}

// Outcome predicate evaluation against the true model.
class Judge {
 public:
  Judge(const ScenarioSpec& truth, const Multibody& body) : spec_(truth), body_(body) {
    std::visit([this](const auto& p) { init(p); }, spec_.outcome);
  }

  // Verdict after the state reached state.t with `fresh` new events.
  std::optional<Outcome> check(const SimState& state, const ContactEvent* fresh, size_t count) {
    return std::visit([&](const auto& p) { return test(p, state, fresh, count); }, spec_.outcome);
  }

  // Verdict when the run reaches its duration without a decision.
  Outcome at_end() const {
    if (latched_) return *latched_;
    if (std::holds_alternative<TimeoutPredicate>(spec_.outcome) ||
        std::holds_alternative<RegionPredicate>(spec_.outcome)) {
      return Outcome::timeout();
    }
    return Outcome::success();
  }

 private:
  void init(const TimeoutPredicate&) {}
  void init(const FallPredicate& p) { body_index_ = spec_.body_index(p.body); }
  void init(const StallPredicate& p) { body_index_ = spec_.body_index(p.body); }
  void init(const RegionPredicate& p) { body_index_ = spec_.body_index(p.body); }
  void init(const CollisionPredicate&) {}

  std::optional<Outcome> test(const TimeoutPredicate&, const SimState&, const ContactEvent*,
                              size_t) {
    return std::nullopt;
  }
  std::optional<Outcome> test(const FallPredicate& p, const SimState& s, const ContactEvent*,
                              size_t) {
    body_.poses(s.q, poses_);
    if (std::abs(poses_[body_index_].theta) > p.roll_threshold) return Outcome::fall(s.t);
    return std::nullopt;
  }
  std::optional<Outcome> test(const StallPredicate& p, const SimState& s, const ContactEvent*,
                              size_t) {
    body_.kinematics(s.q, s.qdot, kin_);
    if (kin_[body_index_].omega * p.direction <= 0.0) return Outcome::fall(s.t);
    return std::nullopt;
  }
  std::optional<Outcome> test(const RegionPredicate& p, const SimState& s, const ContactEvent*,
                              size_t) {
    if (s.t < p.at_time - 1e-12) return std::nullopt;
    body_.poses(s.q, poses_);
    Vec2 x = poses_[body_index_].position();
    bool inside = x.x >= p.min.x && x.x <= p.max.x && x.y >= p.min.y && x.y <= p.max.y;
    return inside ? Outcome::success() : Outcome::timeout();
  }
  // A collision is latched rather than ending the run, so that struck and
  // clear traces cover the same time span and their event sequences stay
  // comparable.
  std::optional<Outcome> test(const CollisionPredicate& p, const SimState&,
                              const ContactEvent* fresh, size_t count) {
    for (size_t i = 0; i < count && !latched_; ++i) {
      const ContactEvent& e = fresh[i];
      if (e.kind == EventKind::kImpact && pair_matches(e, p.body, p.obstacle)) {
        latched_ = Outcome::collision(e.t, e.pair_a, e.pair_b);
      }
    }
    return std::nullopt;
  }

  const ScenarioSpec& spec_;
  const Multibody& body_;
  int body_index_ = -1;
  std::vector<Pose2> poses_;
  std::vector<BodyKinematics> kin_;
  std::optional<Outcome> latched_;
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\t' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::vector<std::string> coordinate_units(const ScenarioSpec& spec) {
  std::vector<std::string> units;
  for (const Body& b : spec.bodies) {
    const Joint* parent = nullptr;
    for (const Joint& j : spec.joints) {
      if (j.child == b.id) parent = &j;
    }
    if (parent) {
      units.push_back(parent->kind == JointKind::kRevolute ? "rad" : "m");
    } else {
      units.insert(units.end(), {"m", "m", "rad"});
    }
  }
  return units;
}

Trace simulate_trace(const ScenarioSpec& expected, const Particle& particle,
                     const RunOptions& options) {
  auto controller = make_controller(expected);
  return simulate_trace(expected, particle, *controller, options);
}

Trace simulate_trace(const ScenarioSpec& expected, const Particle& particle,
                     const Controller& prototype, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Trace trace;
  trace.particle_index = particle.index;
  trace.seed = particle.seed;
  trace.coordinates = coordinate_names(expected);
  trace.coordinate_units = coordinate_units(expected);
  auto finish = [&](Outcome o) {
    trace.outcome = std::move(o);
    trace.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
  };

  ScenarioSpec truth;
  try {
    truth = apply_offsets(expected, particle);
    validate_scenario(truth);
  } catch (const ScenarioError& e) {
    return finish(Outcome::invalid(one_line(std::string("perturbed model rejected: ") + e.what()),
                                   0.0));
  }

  Simulator sim(truth, options.sim);
  if (options.step_observer) sim.set_step_observer(options.step_observer);
  std::unique_ptr<Controller> controller = prototype.clone();
  Judge judge(truth, sim.multibody());

  const double h = truth.timestep;
  const int64_t steps = std::llround(truth.duration / h);
  const int64_t per_control = truth.steps_per_control();
  const int64_t stride =
      std::max<int64_t>(1, std::llround(1.0 / (truth.telemetry_rate * h)));
  const Multibody& body = sim.multibody();

  std::map<std::string, double> applied;
  std::vector<std::pair<std::string, int>> actuated;
  for (const Joint& j : truth.joints) {
    if (!j.actuated) continue;
    applied[j.id] = 0.0;
    actuated.emplace_back(j.id, body.joint_coordinate(j.id));
  }

  LagLine lag(h);
  SimState state;
  Vector u = Vector::Zero(body.dof());
  JitterSample jitter;
  std::vector<ContactEvent>& events = trace.events;
  try {
    state = sim.initial_state(events);
    trace.telemetry.push_back(row_of(state));
    if (auto o = judge.check(state, events.data(), events.size())) return finish(*o);
    for (int64_t k = 0; k < steps; ++k) {
      if (k % per_control == 0) {
        const int64_t tick = k / per_control;
        jitter = sample_jitter(particle, tick);
        SensorReading reading = sense(state.q, state.qdot, trace.coordinates, applied, jitter);
        ControlCommand cmd;
        try {
          cmd = controller->step(reading);
        } catch (const std::exception& e) {
          return finish(Outcome::invalid(one_line(std::string("controller failed: ") + e.what()),
                                         state.t));
        }
        if (options.command_observer) options.command_observer(reading, cmd);
        lag.emit(k, truth.control_lag + jitter.value("control.lag_jitter"), std::move(cmd));
      }
      u.setZero();
      if (const ControlCommand* cmd = lag.active(k)) {
        for (const auto& [joint, value] : cmd->u) {
          const double torque = value + jitter.value("actuator." + joint);
          applied[joint] = torque;
          for (const auto& [id, c] : actuated) {
            if (id == joint) u[c] += torque;
          }
        }
      }
      const size_t first = events.size();
      sim.advance(state, static_cast<double>(k + 1) * h, u, events);
      if (!state.q.allFinite() || !state.qdot.allFinite()) {
        return finish(Outcome::invalid("non-finite state", state.t));
      }
      bool recorded = false;
      if ((k + 1) % stride == 0) {
        trace.telemetry.push_back(row_of(state));
        recorded = true;
      }
      if (auto o = judge.check(state, events.data() + first, events.size() - first)) {
        if (!recorded) trace.telemetry.push_back(row_of(state));
        return finish(*o);
      }
    }
  } catch (const SolverError& e) {
    if (trace.telemetry.empty() || trace.telemetry.back().t != state.t) {
      if (state.q.size() == body.dof()) trace.telemetry.push_back(row_of(state));
    }
    return finish(Outcome::invalid(one_line(e.what()), state.t));
  }
  if (trace.telemetry.back().t != state.t) trace.telemetry.push_back(row_of(state));
  return finish(judge.at_end());
}

}  // namespace partrace
