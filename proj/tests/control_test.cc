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

#include <cmath>

#include <gtest/gtest.h>

#include "partrace/control.h"
#include "partrace/trace_runner.h"
#include "test_util.h"

namespace partrace {
namespace {

ControlCommand command(int64_t tick, double u) { return {tick, {{"j", u}}}; }

TEST(LagLine, ZeroLagAppliesOnTheEmitStep) {
  LagLine line(0.01);
  EXPECT_EQ(line.active(0), nullptr);
  line.emit(0, 0.0, command(0, 1.0));
  ASSERT_NE(line.active(0), nullptr);
  EXPECT_EQ(line.active(0)->u[0].second, 1.0);
}

TEST(LagLine, LagRoundsUpToWholeSteps) {
  EXPECT_EQ(LagLine::lag_steps(0.0, 0.01), 0);
  EXPECT_EQ(LagLine::lag_steps(-0.5, 0.01), 0);
  EXPECT_EQ(LagLine::lag_steps(0.001, 0.01), 1);
  EXPECT_EQ(LagLine::lag_steps(0.01, 0.01), 1);
  EXPECT_EQ(LagLine::lag_steps(0.02, 0.01), 2);
  EXPECT_EQ(LagLine::lag_steps(0.0201, 0.01), 3);
  EXPECT_EQ(LagLine::lag_steps(0.03, 0.01), 3);
  EXPECT_EQ(LagLine::lag_steps(std::nan(""), 0.01), 0);
}

TEST(LagLine, DelayedCommandArrivesAfterQuantizedLag) {
  LagLine line(0.001);
  line.emit(10, 0.0025, command(1, 5.0));  // ceil(2.5) = 3 steps
  EXPECT_EQ(line.active(12), nullptr);
  ASSERT_NE(line.active(13), nullptr);
  EXPECT_EQ(line.active(13)->tick, 1);
}

TEST(LagLine, ShorterLagNeverOvertakesAnEarlierCommand) {
  LagLine line(0.001);
  line.emit(0, 0.005, command(0, 1.0));  // due at step 5
  line.emit(1, 0.0, command(1, 2.0));    // would be due at 1; held to 5
  EXPECT_EQ(line.active(4), nullptr);
  ASSERT_NE(line.active(5), nullptr);
  EXPECT_EQ(line.active(5)->tick, 1);
}

TEST(LagLine, ActiveAtUsesTheStepGrid) {
  LagLine line(0.01);
  line.emit(3, 0.0, command(3, 1.0));
  EXPECT_EQ(line.active_at(0.0299), nullptr);
  EXPECT_NE(line.active_at(0.03), nullptr);
}

TEST(Smoothstep, EndpointsAndDerivatives) {
  EXPECT_EQ(smoothstep(-1.0), 0.0);
  EXPECT_EQ(smoothstep(0.0), 0.0);
  EXPECT_EQ(smoothstep(1.0), 1.0);
  EXPECT_EQ(smoothstep(2.0), 1.0);
  EXPECT_DOUBLE_EQ(smoothstep(0.5), 0.5);
  for (double u = 0.05; u < 1.0; u += 0.05) {
    const double e = 1e-6;
    EXPECT_NEAR(smoothstep_d1(u), (smoothstep(u + e) - smoothstep(u - e)) / (2 * e), 1e-6);
    EXPECT_NEAR(smoothstep_d2(u), (smoothstep_d1(u + e) - smoothstep_d1(u - e)) / (2 * e), 1e-5);
  }
}

TEST(Sense, AddsJitterPerCoordinateAndTorqueChannel) {
  Vector q(2), qd(2);
  q << 1.0, 2.0;
  qd << 3.0, 4.0;
  JitterSample j;
  j.control_tick = 7;
  j.values = {{"sensor.q.b", 0.5}, {"sensor.qdot.a", -1.0}, {"sensor.torque.hip", 0.25}};
  SensorReading r = sense(q, qd, {"a", "b"}, {{"hip", 2.0}, {"knee", 1.0}}, j);
  EXPECT_EQ(r.tick, 7);
  EXPECT_EQ(r.observed_q[0], 1.0);
  EXPECT_EQ(r.observed_q[1], 2.5);
  EXPECT_EQ(r.observed_qdot[0], 2.0);
  EXPECT_EQ(r.observed_qdot[1], 4.0);
  EXPECT_EQ(r.channels.at("sensor.torque.hip"), 2.25);
  EXPECT_EQ(r.channels.at("sensor.torque.knee"), 1.0);
}

TEST(MakeController, RejectsUnknownKind) {
  ScenarioSpec s = testing::bundled("bouncing_disc");
  s.controller.kind = "mpc";
  try {
    make_controller(s);
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.path(), "controller.kind");
  }
}

TEST(MakeController, StepperRejectsLiftMarginOutOfRange) {
  ScenarioSpec s = testing::bundled("curb_stepper");
  for (double m : {-0.1, 0.5, 0.7}) {
    s.controller.params["lift_margin"] = m;
    EXPECT_THROW(make_controller(s), ScenarioError) << m;
  }
  s.controller.params["lift_margin"] = 0.0;
  EXPECT_NO_THROW(make_controller(s));
}

TEST(MakeController, StepperNeedsItsParameters) {
  ScenarioSpec s = testing::bundled("curb_stepper");
  s.controller.params.erase("kp");
  try {
    make_controller(s);
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.path(), "controller.params.kp");
  }
}

TEST(Stepper, CommandsRespectEffortLimits) {
  ScenarioSpec s = testing::bundled("curb_stepper");
  RunOptions options;
  double worst = 0.0;
  options.command_observer = [&](const SensorReading&, const ControlCommand& c) {
    for (const auto& [joint, u] : c.u) {
      worst = std::max(worst, std::abs(u) / s.find_joint(joint)->effort_limit);
    }
  };
  simulate_trace(s, unperturbed_particle(s, 0), options);
  EXPECT_LE(worst, 1.0);
  EXPECT_GT(worst, 0.0);
}

TEST(PdController, TracksAHeldSetpoint) {
  // A single revolute pendulum link held at a fixed waypoint by a stiff PD.
  ScenarioSpec s = load_scenario(R"({
    "name": "pd_link", "duration": 2.0, "timestep": 0.001, "control_rate": 1000,
    "gravity": [0.0, 0.0],
    "bodies": [{"id": "link", "mass": 1.0, "inertia": 0.1, "shape": {"kind": "disc", "radius": 0.05},
                "pose": [0.0, 1.0, 0.0]}],
    "joints": [{"id": "hinge", "kind": "revolute", "parent": "world", "child": "link",
                "anchor_parent": [0.0, 1.0], "anchor_child": [0.0, 0.0], "actuated": true}],
    "controller": {"kind": "pd", "params": {"kp": 40.0, "kd": 4.0},
                   "trajectories": {"hinge": [[0.0, 0.5], [2.0, 0.5]]}},
    "outcome": {"kind": "timeout"}
  })");
  Trace t = simulate_trace(s, unperturbed_particle(s, 0));
  ASSERT_FALSE(t.telemetry.empty());
  EXPECT_NEAR(t.telemetry.back().q[0], 0.5, 1e-3);
}

}  // namespace
}  // namespace partrace
