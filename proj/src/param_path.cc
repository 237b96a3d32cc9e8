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

#include "partrace/param_path.h"

#include <algorithm>
#include <charconv>
#include <string_view>
#include <vector>

namespace partrace {
namespace {

[[noreturn]] void unknown(const std::string& path, const std::string& why) {
  throw ScenarioError(ScenarioError::Kind::kValidation, path, "cannot resolve '" + path + "': " + why);
}

std::vector<std::string> split(const std::string& path) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t dot = path.find('.', start);
    out.push_back(path.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return out;
}

double* vec_field(Vec2& v, const std::string& seg) {
  if (seg == "x") return &v.x;
  if (seg == "y") return &v.y;
  return nullptr;
}

double* pose_field(Pose2& p, const std::string& seg) {
  if (seg == "x") return &p.x;
  if (seg == "y") return &p.y;
  if (seg == "theta") return &p.theta;
  return nullptr;
}

double* material_field(Material& m, const std::string& seg) {
  if (seg == "friction") return &m.friction;
  if (seg == "restitution") return &m.restitution;
  return nullptr;
}

// Parses "vertex[12]" into 12; -1 when the segment has another form.
int vertex_index(const std::string& seg) {
  constexpr std::string_view kPrefix = "vertex[";
  if (seg.size() <= kPrefix.size() + 1 || seg.compare(0, kPrefix.size(), kPrefix) != 0 ||
      seg.back() != ']') {
    return -1;
  }
  int index = -1;
  const char* first = seg.data() + kPrefix.size();
  const char* last = seg.data() + seg.size() - 1;
  auto [ptr, ec] = std::from_chars(first, last, index);
  if (ec != std::errc() || ptr != last || index < 0) return -1;
  return index;
}

double* body_field(Body& body, const std::vector<std::string>& s, const std::string& path) {
  const size_t n = s.size();
  if (n == 3) {
    if (s[2] == "mass") return &body.mass;
    if (s[2] == "inertia") return &body.inertia;
    if (double* f = material_field(body.material, s[2])) return f;
    return nullptr;
  }
  if (n == 4 && s[2] == "com") return vec_field(body.com, s[3]);
  if (n == 4 && s[2] == "pose") return pose_field(body.initial_pose, s[3]);
  if (n == 4 && s[2] == "velocity") return pose_field(body.initial_velocity, s[3]);
  if (n >= 4 && s[2] == "shape") {
    if (auto* disc = std::get_if<DiscShape>(&body.shape)) {
      if (n == 4 && s[3] == "radius") return &disc->radius;
    } else if (auto* cap = std::get_if<CapsuleShape>(&body.shape)) {
      if (n == 4 && s[3] == "radius") return &cap->radius;
      if (n == 4 && s[3] == "half_length") return &cap->half_length;
    } else if (auto* poly = std::get_if<PolygonShape>(&body.shape)) {
      if (poly->regular) {
        if (n == 4 && s[3] == "radius") return &poly->regular->radius;
        if (n == 4 && s[3] == "phase") return &poly->regular->phase;
      } else if (n == 5) {
        int index = vertex_index(s[3]);
        if (index >= 0) {
          if (index >= static_cast<int>(poly->vertices.size())) unknown(path, "vertex index out of range");
          return vec_field(poly->vertices[index], s[4]);
        }
      }
    }
  }
  return nullptr;
}

double* joint_field(Joint& joint, const std::vector<std::string>& s, const std::string& path) {
  const size_t n = s.size();
  if (n == 3 && s[2] == "effort_limit") return &joint.effort_limit;
  if (n == 4 && s[2] == "anchor_parent") return vec_field(joint.anchor_parent, s[3]);
  if (n == 4 && s[2] == "anchor_child") return vec_field(joint.anchor_child, s[3]);
  if (n == 4 && s[2] == "limits") {
    if (!joint.limits) unknown(path, "joint has no limits");
    if (s[3] == "lower") return &joint.limits->lower;
    if (s[3] == "upper") return &joint.limits->upper;
  }
  return nullptr;
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::optional<ParamRef> resolve_channel(const ScenarioSpec& spec, const std::string& path) {
  if (path == "control.lag_jitter") return ParamRef::channel(path);
  auto rest = [&](std::string_view prefix) -> std::optional<std::string> {
    if (path.size() > prefix.size() && path.compare(0, prefix.size(), prefix) == 0) {
      return path.substr(prefix.size());
    }
    return std::nullopt;
  };
  if (auto name = rest("sensor.q.")) {
    if (!contains(coordinate_names(spec), *name)) unknown(path, "no coordinate '" + *name + "'");
    return ParamRef::channel(path);
  }
  if (auto name = rest("sensor.qdot.")) {
    if (!contains(coordinate_names(spec), *name)) unknown(path, "no coordinate '" + *name + "'");
    return ParamRef::channel(path);
  }
  for (std::string_view prefix : {"sensor.torque.", "actuator."}) {
    if (auto name = rest(prefix)) {
      const Joint* joint = spec.find_joint(*name);
      if (!joint) unknown(path, "no joint '" + *name + "'");
      if (!joint->actuated) unknown(path, "joint '" + *name + "' is not actuated");
      return ParamRef::channel(path);
    }
  }
  return std::nullopt;
}

}  // namespace

void ParamRef::write(double v) const {
  if (!value_) {
    throw ScenarioError(ScenarioError::Kind::kValidation, path_,
                        "'" + path_ + "' is a noise channel, not a scenario field");
  }
  *value_ = v;
}

bool is_noise_channel(const std::string& path) {
  return path.starts_with("sensor.") || path.starts_with("actuator.") ||
         path == "control.lag_jitter";
}

ParamRef resolve_path(ScenarioSpec& spec, const std::string& path) {
  if (is_noise_channel(path)) {
    if (auto ref = resolve_channel(spec, path)) return *ref;
    unknown(path, "unknown noise channel");
  }
  const std::vector<std::string> s = split(path);
  double* field = nullptr;
  if (s.size() == 1) {
    if (s[0] == "duration") field = &spec.duration;
    if (s[0] == "timestep") field = &spec.timestep;
    if (s[0] == "control_rate") field = &spec.control_rate;
    if (s[0] == "telemetry_rate") field = &spec.telemetry_rate;
  } else if (s.size() == 2 && s[0] == "gravity") {
    field = vec_field(spec.gravity, s[1]);
  } else if (s.size() == 2 && s[0] == "control" && s[1] == "lag") {
    field = &spec.control_lag;
  } else if (s.size() == 2 && s[0] == "controller") {
    auto it = spec.controller.params.find(s[1]);
    if (it == spec.controller.params.end()) unknown(path, "no controller parameter '" + s[1] + "'");
    field = &it->second;
  } else if (s.size() >= 3 && s[0] == "body") {
    auto it = std::find_if(spec.bodies.begin(), spec.bodies.end(),
                           [&](const Body& b) { return b.id == s[1]; });
    if (it == spec.bodies.end()) unknown(path, "no body '" + s[1] + "'");
    field = body_field(*it, s, path);
  } else if (s.size() >= 3 && s[0] == "joint") {
    auto it = std::find_if(spec.joints.begin(), spec.joints.end(),
                           [&](const Joint& j) { return j.id == s[1]; });
    if (it == spec.joints.end()) unknown(path, "no joint '" + s[1] + "'");
    field = joint_field(*it, s, path);
  } else if (s.size() >= 3 && s[0] == "terrain") {
    auto it = std::find_if(spec.terrain.segments.begin(), spec.terrain.segments.end(),
                           [&](const TerrainSegment& t) { return t.id == s[1]; });
    if (it == spec.terrain.segments.end()) unknown(path, "no terrain segment '" + s[1] + "'");
    if (s.size() == 3) field = material_field(it->material, s[2]);
    if (s.size() == 4 && s[2] == "a") field = vec_field(it->a, s[3]);
    if (s.size() == 4 && s[2] == "b") field = vec_field(it->b, s[3]);
  } else if (s.size() >= 3 && s[0] == "obstacle") {
    auto it = std::find_if(spec.terrain.obstacles.begin(), spec.terrain.obstacles.end(),
                           [&](const Obstacle& o) { return o.id == s[1]; });
    if (it == spec.terrain.obstacles.end()) unknown(path, "no obstacle '" + s[1] + "'");
    if (s.size() == 3) field = material_field(it->material, s[2]);
    if (s.size() == 4 && s[2] == "min") field = vec_field(it->min, s[3]);
    if (s.size() == 4 && s[2] == "max") field = vec_field(it->max, s[3]);
  }
  if (!field) unknown(path, "unknown or non-numeric field");
  return ParamRef::field(path, field);
}

double read_path(const ScenarioSpec& spec, const std::string& path) {
  // resolve_path only hands out a pointer; nothing is written here.
  return resolve_path(const_cast<ScenarioSpec&>(spec), path).read();
}

}  // namespace partrace
