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

// Sensing, controllers and lagged actuation.
//
// Controllers are built from the expected (unperturbed) scenario and only
// ever see SensorReadings, so particle offsets cannot leak into them.

#ifndef PARTRACE_CONTROL_H_
#define PARTRACE_CONTROL_H_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "partrace/model.h"
#include "partrace/multibody.h"
#include "partrace/sampling.h"

namespace partrace {

struct SensorReading {
  int64_t tick = 0;
  Vector observed_q;
  Vector observed_qdot;
  std::map<std::string, double> channels;  // sensor.torque.<joint> readbacks
};

struct ControlCommand {
  int64_t tick = 0;
  std::vector<std::pair<std::string, double>> u;  // actuated joints, spec order
  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

// Builds a reading from the true state. Coordinates get the jitter of
// sensor.q.<name> / sensor.qdot.<name>; each actuated joint gets a
// sensor.torque.<joint> channel equal to the torque applied last step plus
// its jitter. Channels without a distribution pass through exactly.
SensorReading sense(const Vector& q, const Vector& qdot,
                    const std::vector<std::string>& coordinates,
                    const std::map<std::string, double>& applied_torque,
                    const JitterSample& jitter);

class Controller {
 public:
  virtual ~Controller() = default;
  virtual ControlCommand step(const SensorReading& reading) = 0;
  virtual std::unique_ptr<Controller> clone() const = 0;
};

// Instantiates spec.controller against the expected model. Throws
// ScenarioError for an unknown kind or missing parameters.
std::unique_ptr<Controller> make_controller(const ScenarioSpec& expected);

// Quintic smoothstep 10u^3 - 15u^4 + 6u^5 and its first two derivatives,
// clamped to [0, 1] outside the unit interval.
double smoothstep(double u);
double smoothstep_d1(double u);
double smoothstep_d2(double u);

// FIFO of emitted commands. Lags are ceiling-quantized to whole simulation
// steps: a command emitted at step k with lag L applies from step
// k + ceil(L / h), and never before any command emitted earlier.
class LagLine {
 public:
  explicit LagLine(double timestep) : h_(timestep) {}

  static int64_t lag_steps(double lag, double timestep);

  void emit(int64_t emit_step, double lag, ControlCommand command);
  // Most recent command due at `step`; nullptr before the first arrival.
  const ControlCommand* active(int64_t step);
  // Same, at time `now` (seconds) on the step grid.
  const ControlCommand* active_at(double now);

 private:
  double h_;
  int64_t last_apply_ = INT64_MIN;
  std::deque<std::pair<int64_t, ControlCommand>> queue_;
  ControlCommand current_;
  bool has_current_ = false;
};

}  // namespace partrace

#endif  // PARTRACE_CONTROL_H_
