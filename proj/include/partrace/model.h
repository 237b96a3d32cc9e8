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

// Declarative scenario description: bodies, joints, terrain, controller,
// outcome predicate and the parameter distributions a particle samples from.
// A ScenarioSpec is plain data; validation lives in validate_scenario() and
// every ScenarioSpec handed out by load_scenario() has passed it.

#ifndef PARTRACE_MODEL_H_
#define PARTRACE_MODEL_H_

#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "partrace/vec2.h"

namespace partrace {

inline constexpr const char* kWorld = "world";

struct Material {
  double friction = 0.5;
  double restitution = 0.0;
  friend bool operator==(const Material&, const Material&) = default;
};

struct DiscShape {
  double radius = 0.0;
  friend bool operator==(const DiscShape&, const DiscShape&) = default;
};

// Capsule along the body-frame x axis, centered on the frame origin.
struct CapsuleShape {
  double half_length = 0.0;
  double radius = 0.0;
  friend bool operator==(const CapsuleShape&, const CapsuleShape&) = default;
};

// Generator for a regular polygon; the vertex list is derived from it.
struct RegularPolygon {
  int sides = 0;
  double radius = 0.0;  // circumradius (spoke length for a rimless wheel)
  double phase = 0.0;   // angle of vertex 0, measured from -y
  friend bool operator==(const RegularPolygon&, const RegularPolygon&) = default;
};

// Either an explicit vertex list or a regular-polygon generator (in which
// case `vertices` stays empty).
struct PolygonShape {
  std::vector<Vec2> vertices;  // body frame, counter-clockwise
  std::optional<RegularPolygon> regular;
  friend bool operator==(const PolygonShape&, const PolygonShape&) = default;
};

using Shape = std::variant<DiscShape, CapsuleShape, PolygonShape>;

// Vertices of a polygon shape; regular polygons are materialized here.
std::vector<Vec2> polygon_vertices(const PolygonShape& shape);

struct Body {
  std::string id;
  double mass = 0.0;
  double inertia = 0.0;  // about the center of mass
  Shape shape = DiscShape{};
  Vec2 com;  // center of mass in the body frame
  Pose2 initial_pose;
  Pose2 initial_velocity;
  Material material;  // used for body-body contact only
  int collision_group = 0;  // bodies sharing a nonzero group never collide
  friend bool operator==(const Body&, const Body&) = default;
};

enum class JointKind { kRevolute, kPrismatic };

struct JointLimits {
  double lower = 0.0;
  double upper = 0.0;
  friend bool operator==(const JointLimits&, const JointLimits&) = default;
};

struct Joint {
  std::string id;
  std::string parent = kWorld;
  std::string child;
  Vec2 anchor_parent;
  Vec2 anchor_child;
  Vec2 axis{1.0, 0.0};  // prismatic slide direction, parent frame
  JointKind kind = JointKind::kRevolute;
  std::optional<JointLimits> limits;
  bool actuated = false;
  double effort_limit = std::numeric_limits<double>::infinity();
  friend bool operator==(const Joint&, const Joint&) = default;
};

// Terrain segment; the solid side is to the right of a->b (the outward
// normal is perp(b - a) normalized).
struct TerrainSegment {
  std::string id;
  Vec2 a;
  Vec2 b;
  Material material;
  friend bool operator==(const TerrainSegment&, const TerrainSegment&) = default;
};

// Axis-aligned static box.
struct Obstacle {
  std::string id;
  Vec2 min;
  Vec2 max;
  Material material;
  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct Terrain {
  std::vector<TerrainSegment> segments;
  std::vector<Obstacle> obstacles;
  friend bool operator==(const Terrain&, const Terrain&) = default;
};

enum class DistributionKind { kNormal, kUniform };
enum class SamplePhase { kInitial, kPerStep };
enum class OffsetMode { kAdditive, kMultiplicative };

// Distribution over the offset applied to a target parameter.
//   additive:        true = expected + offset
//   multiplicative:  true = expected * (1 + offset)
// For normal offsets, sigma_rel (when set) scales with |expected value|.
struct ParamDistribution {
  std::string target;
  DistributionKind kind = DistributionKind::kNormal;
  double mean = 0.0;
  double sigma = 0.0;
  std::optional<double> sigma_rel;
  double lo = 0.0;
  double hi = 0.0;
  SamplePhase phase = SamplePhase::kInitial;
  double truncation = 3.0;
  OffsetMode mode = OffsetMode::kAdditive;
  friend bool operator==(const ParamDistribution&, const ParamDistribution&) = default;
};

struct FallPredicate {
  std::string body;
  double roll_threshold = 0.0;  // |theta| beyond this is a fall
  friend bool operator==(const FallPredicate&, const FallPredicate&) = default;
};

// Walking bodies that roll (rimless wheel): the walk has failed once the
// body's angular velocity stops pointing in `direction` (+1 ccw, -1 cw).
struct StallPredicate {
  std::string body;
  int direction = -1;
  friend bool operator==(const StallPredicate&, const StallPredicate&) = default;
};

struct RegionPredicate {
  std::string body;
  Vec2 min;
  Vec2 max;
  double at_time = 0.0;
  friend bool operator==(const RegionPredicate&, const RegionPredicate&) = default;
};

struct CollisionPredicate {
  std::string body;
  std::string obstacle;
  friend bool operator==(const CollisionPredicate&, const CollisionPredicate&) = default;
};

struct TimeoutPredicate {
  friend bool operator==(const TimeoutPredicate&, const TimeoutPredicate&) = default;
};

using OutcomePredicateSpec = std::variant<TimeoutPredicate, FallPredicate, StallPredicate,
                                          RegionPredicate, CollisionPredicate>;

struct ControllerSpec {
  std::string kind = "passive";
  std::map<std::string, double> params;
  std::map<std::string, std::string> joints;  // role -> joint id
  // joint id -> piecewise-linear (t, q) waypoints, for the PD follower
  std::map<std::string, std::vector<std::pair<double, double>>> trajectories;
  friend bool operator==(const ControllerSpec&, const ControllerSpec&) = default;
};

struct ScenarioSpec {
  std::string name;
  std::vector<Body> bodies;
  std::vector<Joint> joints;
  Terrain terrain;
  Vec2 gravity{0.0, -9.81};
  double duration = 0.0;
  double timestep = 0.0;
  double control_rate = 0.0;
  double telemetry_rate = 100.0;
  double control_lag = 0.0;
  ControllerSpec controller;
  std::vector<ParamDistribution> distributions;
  OutcomePredicateSpec outcome = TimeoutPredicate{};
  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;

  const Body* find_body(const std::string& id) const;
  const Joint* find_joint(const std::string& id) const;
  const Obstacle* find_obstacle(const std::string& id) const;
  int body_index(const std::string& id) const;  // -1 when absent
  // Number of simulation steps per control period.
  int steps_per_control() const;
};

// Structured error for both parse and validation failures. `path` names the
// offending document path or parameter path; line/column are 1-based and only
// set for parse errors.
class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { kParse, kValidation };

  ScenarioError(Kind kind, std::string path, const std::string& message, int line = 0,
                int column = 0);

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  std::string path_;
  int line_;
  int column_;
};

// Checks every ScenarioSpec invariant; throws ScenarioError(kValidation).
void validate_scenario(const ScenarioSpec& spec);

// True for targets that name a noise channel rather than a model field.
bool is_noise_channel(const std::string& path);

// Generalized coordinate names in state order. Bodies are visited in spec
// order; a free body contributes "<id>.x", "<id>.y", "<id>.theta" and a body
// attached by a joint contributes the joint id.
std::vector<std::string> coordinate_names(const ScenarioSpec& spec);

}  // namespace partrace

#endif  // PARTRACE_MODEL_H_
