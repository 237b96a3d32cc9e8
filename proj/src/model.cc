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

#include "partrace/model.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "partrace/param_path.h"

namespace partrace {
namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& message) {
  throw ScenarioError(ScenarioError::Kind::kValidation, path, path + ": " + message);
}

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) invalid(path, message);
}

bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }
bool finite(const Pose2& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.theta);
}

void validate_material(const Material& m, const std::string& path) {
  require(std::isfinite(m.friction) && m.friction >= 0.0, path + ".friction", "must be >= 0");
  require(m.restitution >= 0.0 && m.restitution <= 1.0, path + ".restitution",
          "must lie in [0, 1]");
}

void validate_polygon(const std::vector<Vec2>& v, const std::string& path) {
  require(v.size() >= 3, path, "polygon needs at least 3 vertices");
  for (size_t i = 0; i < v.size(); ++i) {
    require(finite(v[i]), path, "vertex is not finite");
    Vec2 e0 = v[(i + 1) % v.size()] - v[i];
    Vec2 e1 = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
    require(norm(e0) > 0.0, path, "repeated vertex");
    require(cross(e0, e1) > 0.0, path, "polygon must be convex and counter-clockwise");
  }
  // Turning through more than one revolution means a self-intersecting star.
  double turn = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    Vec2 e0 = v[(i + 1) % v.size()] - v[i];
    Vec2 e1 = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
    turn += std::atan2(cross(e0, e1), dot(e0, e1));
  }
  require(std::abs(turn - 2.0 * std::numbers::pi) < 1e-6, path, "polygon winds more than once");
}

void validate_body(const Body& b, const std::string& path) {
  require(std::isfinite(b.mass) && b.mass > 0.0, path + ".mass", "must be > 0");
  require(std::isfinite(b.inertia) && b.inertia > 0.0, path + ".inertia", "must be > 0");
  require(finite(b.com), path + ".com", "must be finite");
  require(finite(b.initial_pose), path + ".pose", "must be finite");
  require(finite(b.initial_velocity), path + ".velocity", "must be finite");
  validate_material(b.material, path);
  require(b.collision_group >= 0, path + ".collision_group", "must be >= 0");
  const std::string shape = path + ".shape";
  if (auto* disc = std::get_if<DiscShape>(&b.shape)) {
    require(std::isfinite(disc->radius) && disc->radius > 0.0, shape + ".radius", "must be > 0");
  } else if (auto* cap = std::get_if<CapsuleShape>(&b.shape)) {
    require(std::isfinite(cap->radius) && cap->radius > 0.0, shape + ".radius", "must be > 0");
    require(std::isfinite(cap->half_length) && cap->half_length >= 0.0, shape + ".half_length",
            "must be >= 0");
  } else {
    const auto& poly = std::get<PolygonShape>(b.shape);
    if (poly.regular) {
      require(poly.vertices.empty(), shape, "give either vertices or a regular generator");
      require(poly.regular->sides >= 3, shape + ".sides", "must be >= 3");
      require(std::isfinite(poly.regular->radius) && poly.regular->radius > 0.0,
              shape + ".radius", "must be > 0");
      require(std::isfinite(poly.regular->phase), shape + ".phase", "must be finite");
    }
    validate_polygon(polygon_vertices(poly), shape);
  }
}

void validate_joints(const ScenarioSpec& spec) {
  std::set<std::string> children;
  for (const Joint& j : spec.joints) {
    const std::string path = "joint." + j.id;
    require(j.child != kWorld && spec.find_body(j.child), path + ".child",
            "unknown body '" + j.child + "'");
    require(j.parent == kWorld || spec.find_body(j.parent), path + ".parent",
            "unknown body '" + j.parent + "'");
    require(j.parent != j.child, path, "parent and child are the same body");
    require(children.insert(j.child).second, path + ".child",
            "body '" + j.child + "' is the child of more than one joint");
    require(finite(j.anchor_parent), path + ".anchor_parent", "must be finite");
    require(finite(j.anchor_child), path + ".anchor_child", "must be finite");
    if (j.kind == JointKind::kPrismatic) {
      require(finite(j.axis) && norm(j.axis) > 0.0, path + ".axis", "must be a nonzero vector");
    }
    if (j.limits) {
      require(std::isfinite(j.limits->lower) && std::isfinite(j.limits->upper) &&
                  j.limits->lower < j.limits->upper,
              path + ".limits", "lower must be < upper");
    }
    require(!std::isnan(j.effort_limit) && j.effort_limit > 0.0, path + ".effort_limit",
            "must be > 0");
  }
  // Walk parent links from every body; revisiting a body means a loop.
  for (const Joint& start : spec.joints) {
    std::set<std::string> seen{start.child};
    std::string cursor = start.parent;
    while (cursor != kWorld) {
      require(seen.insert(cursor).second, "joint." + start.id, "joints form a kinematic loop");
      const Joint* up = nullptr;
      for (const Joint& j : spec.joints) {
        if (j.child == cursor) up = &j;
      }
      if (!up) break;  // reached a free root body
      cursor = up->parent;
    }
  }
}

void validate_distribution(const ScenarioSpec& spec, const ParamDistribution& d, size_t index) {
  const std::string path = "distributions[" + std::to_string(index) + "]";
  ScenarioSpec scratch = spec;
  resolve_path(scratch, d.target);  // throws naming the target
  if (d.kind == DistributionKind::kNormal) {
    require(std::isfinite(d.mean), path + ".mean", "must be finite");
    require(std::isfinite(d.sigma) && d.sigma >= 0.0, path + ".sigma", "must be >= 0");
    if (d.sigma_rel) {
      require(std::isfinite(*d.sigma_rel) && *d.sigma_rel >= 0.0, path + ".sigma_rel",
              "must be >= 0");
    }
    require(std::isfinite(d.truncation) && d.truncation > 0.0, path + ".truncation",
            "must be > 0");
  } else {
    require(std::isfinite(d.lo) && std::isfinite(d.hi) && d.lo <= d.hi, path,
            "uniform needs finite lo <= hi");
  }
  const bool channel = is_noise_channel(d.target);
  if (d.phase == SamplePhase::kPerStep) {
    require(channel, path + ".phase",
            "per_step applies only to sensor, actuator and lag-jitter channels");
    require(d.mode == OffsetMode::kAdditive, path + ".mode", "noise channels are additive");
  } else {
    require(!channel, path + ".phase", "noise channels must be sampled per_step");
  }
}

void validate_outcome(const ScenarioSpec& spec) {
  auto body_exists = [&](const std::string& id, const std::string& path) {
    require(spec.find_body(id) != nullptr, path, "unknown body '" + id + "'");
  };
  if (auto* f = std::get_if<FallPredicate>(&spec.outcome)) {
    body_exists(f->body, "outcome.body");
    require(std::isfinite(f->roll_threshold) && f->roll_threshold > 0.0,
            "outcome.roll_threshold", "must be > 0");
  } else if (auto* s = std::get_if<StallPredicate>(&spec.outcome)) {
    body_exists(s->body, "outcome.body");
    require(s->direction == 1 || s->direction == -1, "outcome.direction", "must be +1 or -1");
  } else if (auto* r = std::get_if<RegionPredicate>(&spec.outcome)) {
    body_exists(r->body, "outcome.body");
    require(r->min.x < r->max.x && r->min.y < r->max.y, "outcome.box", "min must be < max");
    require(r->at_time > 0.0 && r->at_time <= spec.duration, "outcome.at_time",
            "must lie in (0, duration]");
  } else if (auto* c = std::get_if<CollisionPredicate>(&spec.outcome)) {
    body_exists(c->body, "outcome.body");
    require(spec.find_obstacle(c->obstacle) != nullptr, "outcome.obstacle",
            "unknown obstacle '" + c->obstacle + "'");
  }
}

}  // namespace

ScenarioError::ScenarioError(Kind kind, std::string path, const std::string& message, int line,
                             int column)
    : std::runtime_error(message),
      kind_(kind),
      path_(std::move(path)),
      line_(line),
      column_(column) {}

std::vector<Vec2> polygon_vertices(const PolygonShape& shape) {
  if (!shape.regular) return shape.vertices;
  const RegularPolygon& r = *shape.regular;
  std::vector<Vec2> out;
  out.reserve(r.sides);
  for (int k = 0; k < r.sides; ++k) {
    double a = r.phase + 2.0 * std::numbers::pi * k / r.sides;
    out.push_back({r.radius * std::sin(a), -r.radius * std::cos(a)});
  }
  return out;
}

const Body* ScenarioSpec::find_body(const std::string& id) const {
  for (const Body& b : bodies) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

const Joint* ScenarioSpec::find_joint(const std::string& id) const {
  for (const Joint& j : joints) {
    if (j.id == id) return &j;
  }
  return nullptr;
}

const Obstacle* ScenarioSpec::find_obstacle(const std::string& id) const {
  for (const Obstacle& o : terrain.obstacles) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

int ScenarioSpec::body_index(const std::string& id) const {
  for (size_t i = 0; i < bodies.size(); ++i) {
    if (bodies[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int ScenarioSpec::steps_per_control() const {
  return std::max(1, static_cast<int>(std::lround(1.0 / (control_rate * timestep))));
}

std::vector<std::string> coordinate_names(const ScenarioSpec& spec) {
  std::vector<std::string> names;
  for (const Body& b : spec.bodies) {
    const Joint* parent = nullptr;
    for (const Joint& j : spec.joints) {
      if (j.child == b.id) parent = &j;
    }
    if (parent) {
      names.push_back(parent->id);
    } else {
      names.push_back(b.id + ".x");
      names.push_back(b.id + ".y");
      names.push_back(b.id + ".theta");
    }
  }
  return names;
}

void validate_scenario(const ScenarioSpec& spec) {
  require(!spec.name.empty(), "name", "must not be empty");
  require(!spec.bodies.empty(), "bodies", "at least one body is required");
  require(finite(spec.gravity), "gravity", "must be finite");
  require(std::isfinite(spec.duration) && spec.duration > 0.0, "duration", "must be > 0");
  require(std::isfinite(spec.timestep) && spec.timestep > 0.0, "timestep", "must be > 0");
  require(spec.timestep <= spec.duration, "timestep", "must not exceed duration");
  require(std::isfinite(spec.control_rate) && spec.control_rate > 0.0, "control_rate",
          "must be > 0");
  require(spec.control_rate * spec.timestep <= 1.0 + 1e-12, "control_rate",
          "control period must be at least one timestep");
  {
    double steps = 1.0 / (spec.control_rate * spec.timestep);
    require(std::abs(steps - std::round(steps)) <= 1e-9 * steps, "control_rate",
            "control period must be an integer multiple of the timestep");
  }
  require(std::isfinite(spec.telemetry_rate) && spec.telemetry_rate > 0.0, "telemetry_rate",
          "must be > 0");
  require(std::isfinite(spec.control_lag) && spec.control_lag >= 0.0, "control.lag",
          "must be >= 0");

  std::set<std::string> ids;
  auto unique_id = [&](const std::string& id, const std::string& path) {
    require(!id.empty(), path, "id must not be empty");
    require(id.find_first_of(". \t\n/[]") == std::string::npos, path,
            "id must not contain '.', '/', brackets or whitespace");
    require(id != kWorld, path, "'world' is reserved");
    require(ids.insert(id).second, path, "duplicate id '" + id + "'");
  };
  for (const Body& b : spec.bodies) {
    unique_id(b.id, "body." + b.id);
    validate_body(b, "body." + b.id);
  }
  for (const TerrainSegment& s : spec.terrain.segments) {
    unique_id(s.id, "terrain." + s.id);
    require(finite(s.a) && finite(s.b) && norm(s.b - s.a) > 0.0, "terrain." + s.id,
            "segment must have positive length");
    validate_material(s.material, "terrain." + s.id);
  }
  for (const Obstacle& o : spec.terrain.obstacles) {
    unique_id(o.id, "obstacle." + o.id);
    require(finite(o.min) && finite(o.max) && o.min.x < o.max.x && o.min.y < o.max.y,
            "obstacle." + o.id, "min must be < max");
    validate_material(o.material, "obstacle." + o.id);
  }
  for (const Joint& j : spec.joints) {
    unique_id(j.id, "joint." + j.id);
  }
  validate_joints(spec);

  const ControllerSpec& c = spec.controller;
  require(c.kind == "passive" || c.kind == "pd" || c.kind == "stepper", "controller.kind",
          "unknown controller '" + c.kind + "'");
  for (const auto& [name, value] : c.params) {
    require(std::isfinite(value), "controller." + name, "must be finite");
  }
  for (const auto& [role, joint] : c.joints) {
    const Joint* j = spec.find_joint(joint);
    require(j != nullptr, "controller.joints." + role, "unknown joint '" + joint + "'");
    require(j->actuated, "controller.joints." + role, "joint '" + joint + "' is not actuated");
  }
  for (const auto& [joint, points] : c.trajectories) {
    const Joint* j = spec.find_joint(joint);
    require(j != nullptr && j->actuated, "controller.trajectories." + joint,
            "must name an actuated joint");
    require(!points.empty(), "controller.trajectories." + joint, "needs at least one waypoint");
    for (size_t i = 0; i < points.size(); ++i) {
      require(std::isfinite(points[i].first) && std::isfinite(points[i].second),
              "controller.trajectories." + joint, "waypoints must be finite");
      require(i == 0 || points[i].first > points[i - 1].first,
              "controller.trajectories." + joint, "waypoint times must increase");
    }
  }

  std::set<std::string> targets;
  for (size_t i = 0; i < spec.distributions.size(); ++i) {
    validate_distribution(spec, spec.distributions[i], i);
    require(targets.insert(spec.distributions[i].target).second,
            "distributions[" + std::to_string(i) + "].target",
            "duplicate target '" + spec.distributions[i].target + "'");
  }
  validate_outcome(spec);
}

}  // namespace partrace
