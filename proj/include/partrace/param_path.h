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

// Dotted parameter paths into a ScenarioSpec.
//
//   gravity.x | gravity.y | duration | timestep | control_rate | control.lag
//   body.<id>.mass | .inertia | .com.x | .com.y | .friction | .restitution
//   body.<id>.shape.radius | .shape.half_length | .shape.phase
//   body.<id>.shape.vertex[i].x | .shape.vertex[i].y
//   body.<id>.pose.x | .pose.y | .pose.theta
//   body.<id>.velocity.x | .velocity.y | .velocity.theta
//   joint.<id>.anchor_parent.x | .anchor_parent.y | .anchor_child.x | ...
//   joint.<id>.limits.lower | .limits.upper | .effort_limit
//   terrain.<segment>.a.x | .a.y | .b.x | .b.y | .friction | .restitution
//   obstacle.<id>.min.x | .min.y | .max.x | .max.y | .friction | .restitution
//   controller.<param>
//
// Noise channels are not fields of the spec; they address sensed or applied
// signals and resolve to a channel reference whose expected value is zero:
//
//   sensor.q.<coordinate>      sensor.qdot.<coordinate>
//   sensor.torque.<joint>      actuator.<joint>       control.lag_jitter

#ifndef PARTRACE_PARAM_PATH_H_
#define PARTRACE_PARAM_PATH_H_

#include <string>

#include "partrace/model.h"

namespace partrace {

class ParamRef {
 public:
  static ParamRef field(std::string path, double* value) {
    return ParamRef(std::move(path), value);
  }
  static ParamRef channel(std::string path) { return ParamRef(std::move(path), nullptr); }

  const std::string& path() const { return path_; }
  bool is_channel() const { return value_ == nullptr; }
  double read() const { return value_ ? *value_ : 0.0; }
  // Throws ScenarioError when the reference is a noise channel.
  void write(double v) const;

 private:
  ParamRef(std::string path, double* value) : path_(std::move(path)), value_(value) {}

  std::string path_;
  double* value_;
};

// Throws ScenarioError(kValidation) naming `path` for unknown segments,
// out-of-range indices and non-numeric fields.
ParamRef resolve_path(ScenarioSpec& spec, const std::string& path);
double read_path(const ScenarioSpec& spec, const std::string& path);

}  // namespace partrace

#endif  // PARTRACE_PARAM_PATH_H_
