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

#ifndef PARTRACE_TRACE_RUNNER_H_
#define PARTRACE_TRACE_RUNNER_H_

#include <functional>

#include "partrace/control.h"
#include "partrace/sampling.h"
#include "partrace/simulator.h"
#include "partrace/trace.h"

namespace partrace {

struct RunOptions {
  SimSettings sim;
  // Sees every substep of the true-model simulation.
  std::function<void(const StepRecord&)> step_observer;
  // Sees every command as it is emitted by the controller.
  std::function<void(const SensorReading&, const ControlCommand&)> command_observer;
};

// Traces one particle: the particle's offsets are applied to a copy of
// `expected` (the true model) while `controller` keeps working from
// `expected`. Solver and controller failures end the trace with an Invalid
// outcome; the telemetry and events up to that point are kept.
Trace simulate_trace(const ScenarioSpec& expected, const Particle& particle,
                     const Controller& controller, const RunOptions& options = {});

// Same, with a controller built from `expected`.
Trace simulate_trace(const ScenarioSpec& expected, const Particle& particle,
                     const RunOptions& options = {});

// "m" or "rad" per generalized coordinate.
std::vector<std::string> coordinate_units(const ScenarioSpec& spec);

}  // namespace partrace

#endif  // PARTRACE_TRACE_RUNNER_H_
