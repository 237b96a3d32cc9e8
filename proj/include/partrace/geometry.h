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

// Gap functions. Every shape is reduced to point features with a radius
// (disc centre, capsule end centres, polygon vertices with radius 0) tested
// against the signed distance field of the other side: a terrain segment, an
// obstacle box or another body. The normal points from side B to side A.

#ifndef PARTRACE_GEOMETRY_H_
#define PARTRACE_GEOMETRY_H_

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "partrace/model.h"

namespace partrace {

enum class OtherKind { kSegment = 0, kObstacle = 1, kBody = 2, kLimit = 3 };

// Identifies one gap function across time. For kSegment/kObstacle/kBody,
// `feature_a` >= 0 tests feature `feature_a` of body `body` against the whole
// of `other`; feature_a == -1 tests feature `feature_b` of `other` (an
// obstacle corner or a feature of body `other`) against body `body`.
// For kLimit, `other` is the joint index and feature_b is 0 (lower) or
// 1 (upper).
struct ContactKey {
  int body = 0;
  int feature_a = 0;
  OtherKind kind = OtherKind::kSegment;
  int other = 0;
  int feature_b = -1;
  friend auto operator<=>(const ContactKey&, const ContactKey&) = default;
};

struct GapSample {
  ContactKey key;
  Vec2 point;   // world point on body A's surface (B's for reversed keys)
  Vec2 normal;  // unit, from B towards A
  double gap = 0.0;
};

// Deepest penetration still reported against a one-sided terrain segment;
// anything lower belongs to terrain further down.
inline constexpr double kSegmentDepthLimit = 0.05;

class Geometry {
 public:
  explicit Geometry(const ScenarioSpec& spec);

  // All gap functions below `margin` at the given body poses, in key order.
  std::vector<GapSample> candidates(const std::vector<Pose2>& poses, double margin) const;
  // Re-evaluates one gap function; nullopt when it has left its domain
  // (a feature past the end of a segment, too deep below it).
  std::optional<GapSample> evaluate(const ContactKey& key, const std::vector<Pose2>& poses) const;

  // Max distance from a body frame origin to any point of its shape.
  double bounding_radius(int body) const { return bodies_[body].bound; }
  // Pair labels used in events: {body id, other id}.
  std::string label_a(const ContactKey& key) const;
  std::string label_b(const ContactKey& key) const;
  double friction(const ContactKey& key) const;
  double restitution(const ContactKey& key) const;
  // Body that carries the "B" side of a body-body key, else -1.
  int other_body(const ContactKey& key) const {
    return key.kind == OtherKind::kBody ? key.other : -1;
  }

  // Signed distance of a world point to a body's shape, with the outward
  // gradient. Exposed for tests.
  double body_sdf(int body, const Pose2& pose, Vec2 p, Vec2* grad) const;

 private:
  struct Feature {
    Vec2 local;
    double radius = 0.0;
  };
  struct BodyShape {
    std::string id;
    Shape shape;
    std::vector<Vec2> polygon;  // materialized vertices for polygons
    std::vector<Feature> features;
    Material material;
    double bound = 0.0;
    bool round = true;  // disc or capsule
  };

  bool collide(int a, int b) const;

  std::vector<BodyShape> bodies_;
  std::vector<TerrainSegment> segments_;
  std::vector<Obstacle> obstacles_;
  std::vector<std::vector<bool>> pair_filter_;  // true when the pair collides
};

// Signed distance to an axis-aligned box with outward gradient.
double box_sdf(Vec2 min, Vec2 max, Vec2 p, Vec2* grad);
// Signed distance to a convex CCW polygon with outward gradient.
double polygon_sdf(const std::vector<Vec2>& poly, Vec2 p, Vec2* grad);

}  // namespace partrace

#endif  // PARTRACE_GEOMETRY_H_
