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

// Property checks over perturbed runs of every bundled scenario.

#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "partrace/harness.h"
#include "partrace/scenarios.h"
#include "test_util.h"

namespace partrace {
namespace {

struct Worst {
  double residual = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  double energy_gain = -std::numeric_limits<double>::infinity();
  int passive_steps = 0;
};

class Invariants : public ::testing::TestWithParam<const char*> {};

TEST_P(Invariants, HoldOnEverySubstepAndTelemetryRow) {
  const ScenarioSpec spec = testing::bundled(GetParam());
  const bool passive = spec.controller.kind == "passive";
  const std::vector<Particle> particles = make_particles(spec, 6, 11);
  for (const Particle& p : particles) {
    Worst w;
    RunOptions options;
    options.step_observer = [&](const StepRecord& r) {
      w.residual = std::max(w.residual, r.solver_residual);
      w.gap = std::min(w.gap, r.min_gap);
      if (r.passive) {
        ++w.passive_steps;
        w.energy_gain = std::max(w.energy_gain, r.energy_after - r.energy_before);
      }
    };
    Trace t = simulate_trace(spec, p, options);
    ASSERT_TRUE(t.outcome.valid()) << t.outcome.reason;
    EXPECT_LE(w.residual, 1e-10) << "particle " << p.index;
    EXPECT_GE(w.gap, -1e-6) << "particle " << p.index;

    // Telemetry rows, checked against the particle's true geometry.
    const ScenarioSpec truth = apply_offsets(spec, p);
    Simulator sim(truth);
    double row_gap = std::numeric_limits<double>::infinity();
    double prev_energy = std::numeric_limits<double>::infinity(), rise = 0.0;
    for (const TelemetryRow& row : t.telemetry) {
      SimState s;
      s.t = row.t;
      s.q = Eigen::Map<const Vector>(row.q.data(), row.q.size());
      s.qdot = Eigen::Map<const Vector>(row.qdot.data(), row.qdot.size());
      for (const ContactPoint& c : sim.gap_functions(s)) row_gap = std::min(row_gap, c.gap);
      const double e = sim.energy(s);
      if (std::isfinite(prev_energy)) rise = std::max(rise, e - prev_energy);
      prev_energy = e;
    }
    EXPECT_GE(row_gap, -1e-6) << "particle " << p.index;
    if (passive) {
      EXPECT_GT(w.passive_steps, 0);
      EXPECT_LE(w.energy_gain, 0.0) << "particle " << p.index;
      EXPECT_LE(rise, 1e-12 * std::max(1.0, std::abs(prev_energy))) << "particle " << p.index;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Bundled, Invariants,
                         ::testing::Values("bouncing_disc", "incline_block", "rimless_wheel",
                                           "curb_stepper"));

}  // namespace
}  // namespace partrace
