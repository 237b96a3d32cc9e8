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

#include "partrace/geometry.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace partrace {
namespace {

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

Vec2 unit_or_up(Vec2 v, double length) {
  return length > 0.0 ? (1.0 / length) * v : Vec2{0.0, 1.0};
}

std::array<Vec2, 4> box_corners(const Obstacle& o) {
  return {Vec2{o.min.x, o.min.y}, Vec2{o.max.x, o.min.y}, Vec2{o.max.x, o.max.y},
          Vec2{o.min.x, o.max.y}};
}

}  // namespace

double box_sdf(Vec2 min, Vec2 max, Vec2 p, Vec2* grad) {
  Vec2 c = 0.5 * (min + max);
  Vec2 e = 0.5 * (max - min);
  double dx = std::abs(p.x - c.x) - e.x;
  double dy = std::abs(p.y - c.y) - e.y;
  if (dx > 0.0 || dy > 0.0) {
    Vec2 q{std::max(dx, 0.0), std::max(dy, 0.0)};
    double dist = norm(q);
    if (grad) *grad = (1.0 / dist) * Vec2{sign_of(p.x - c.x) * q.x, sign_of(p.y - c.y) * q.y};
    return dist;
  }
  if (dx > dy) {
    if (grad) *grad = {sign_of(p.x - c.x), 0.0};
    return dx;
  }
  if (grad) *grad = {0.0, sign_of(p.y - c.y)};
  return dy;
}

double polygon_sdf(const std::vector<Vec2>& poly, Vec2 p, Vec2* grad) {
  const size_t n = poly.size();
  double best = -std::numeric_limits<double>::infinity();
  Vec2 best_normal;
  for (size_t i = 0; i < n; ++i) {
    Vec2 e = poly[(i + 1) % n] - poly[i];
    Vec2 normal = (1.0 / norm(e)) * Vec2{e.y, -e.x};
    double d = dot(normal, p - poly[i]);
    if (d > best) {
      best = d;
      best_normal = normal;
    }
  }
  if (best <= 0.0) {
    if (grad) *grad = best_normal;
    return best;
  }
  double dist = std::numeric_limits<double>::infinity();
  Vec2 closest;
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i];
    Vec2 e = poly[(i + 1) % n] - a;
    double t = std::clamp(dot(p - a, e) / dot(e, e), 0.0, 1.0);
    Vec2 c = a + t * e;
    double d = norm(p - c);
    if (d < dist) {
      dist = d;
      closest = c;
    }
  }
  if (grad) *grad = unit_or_up(p - closest, dist);
  return dist;
}

Geometry::Geometry(const ScenarioSpec& spec)
    : segments_(spec.terrain.segments), obstacles_(spec.terrain.obstacles) {
  for (const Body& b : spec.bodies) {
    BodyShape s;
    s.id = b.id;
    s.shape = b.shape;
    s.material = b.material;
    if (auto* disc = std::get_if<DiscShape>(&b.shape)) {
      s.features.push_back({{0.0, 0.0}, disc->radius});
      s.bound = disc->radius;
    } else if (auto* cap = std::get_if<CapsuleShape>(&b.shape)) {
      s.features.push_back({{-cap->half_length, 0.0}, cap->radius});
      s.features.push_back({{cap->half_length, 0.0}, cap->radius});
      s.bound = cap->half_length + cap->radius;
    } else {
      s.round = false;
      s.polygon = polygon_vertices(std::get<PolygonShape>(b.shape));
      for (Vec2 v : s.polygon) {
        s.features.push_back({v, 0.0});
        s.bound = std::max(s.bound, norm(v));
      }
    }
    bodies_.push_back(std::move(s));
  }
  const size_t n = spec.bodies.size();
  pair_filter_.assign(n, std::vector<bool>(n, true));
  for (size_t i = 0; i < n; ++i) {
    pair_filter_[i][i] = false;
    for (size_t j = 0; j < n; ++j) {
      int gi = spec.bodies[i].collision_group, gj = spec.bodies[j].collision_group;
      if (gi != 0 && gi == gj) pair_filter_[i][j] = false;
    }
  }
  for (const Joint& j : spec.joints) {
    int c = spec.body_index(j.child);
    int p = j.parent == kWorld ? -1 : spec.body_index(j.parent);
    if (p >= 0) pair_filter_[c][p] = pair_filter_[p][c] = false;
  }
}

bool Geometry::collide(int a, int b) const { return pair_filter_[a][b]; }

double Geometry::body_sdf(int body, const Pose2& pose, Vec2 p, Vec2* grad) const {
  const BodyShape& s = bodies_[body];
  Vec2 l = rotate(-pose.theta, p - pose.position());
  Vec2 g;
  double d;
  if (auto* disc = std::get_if<DiscShape>(&s.shape)) {
    double len = norm(l);
    g = unit_or_up(l, len);
    d = len - disc->radius;
  } else if (auto* cap = std::get_if<CapsuleShape>(&s.shape)) {
    Vec2 c{std::clamp(l.x, -cap->half_length, cap->half_length), 0.0};
    double len = norm(l - c);
    g = unit_or_up(l - c, len);
    d = len - cap->radius;
  } else {
    d = polygon_sdf(s.polygon, l, &g);
  }
  if (grad) *grad = rotate(pose.theta, g);
  return d;
}

std::optional<GapSample> Geometry::evaluate(const ContactKey& key,
                                            const std::vector<Pose2>& poses) const {
  const BodyShape& a = bodies_[key.body];
  const Pose2& pa = poses[key.body];
  GapSample out;
  out.key = key;
  switch (key.kind) {
    case OtherKind::kSegment: {
      const Feature& f = a.features[key.feature_a];
      Vec2 p = pa.to_world(f.local);
      const TerrainSegment& seg = segments_[key.other];
      Vec2 d = seg.b - seg.a;
      double len2 = dot(d, d);
      double t = dot(p - seg.a, d) / len2;
      if (t < 0.0 || t > 1.0) return std::nullopt;
      Vec2 n = (1.0 / std::sqrt(len2)) * perp(d);
      double h = dot(n, p - seg.a);
      if (h - f.radius < -kSegmentDepthLimit) return std::nullopt;
      out.gap = h - f.radius;
      out.normal = n;
      out.point = p - f.radius * n;
      return out;
    }
    case OtherKind::kObstacle: {
      const Obstacle& ob = obstacles_[key.other];
      Vec2 g;
      if (key.feature_a >= 0) {
        const Feature& f = a.features[key.feature_a];
        Vec2 p = pa.to_world(f.local);
        out.gap = box_sdf(ob.min, ob.max, p, &g) - f.radius;
        out.normal = g;
        out.point = p - f.radius * g;
      } else {
        Vec2 c = box_corners(ob)[key.feature_b];
        out.gap = body_sdf(key.body, pa, c, &g);
        out.normal = -g;
        out.point = c;
      }
      return out;
    }
    case OtherKind::kBody: {
      Vec2 g;
      if (key.feature_a >= 0) {
        const Feature& f = a.features[key.feature_a];
        Vec2 p = pa.to_world(f.local);
        out.gap = body_sdf(key.other, poses[key.other], p, &g) - f.radius;
        out.normal = g;
        out.point = p - f.radius * g;
      } else {
        const Feature& f = bodies_[key.other].features[key.feature_b];
        Vec2 p = poses[key.other].to_world(f.local);
        out.gap = body_sdf(key.body, pa, p, &g) - f.radius;
        out.normal = -g;
        out.point = p - f.radius * g;
      }
      return out;
    }
    case OtherKind::kLimit:
      break;
  }
  return std::nullopt;
}

std::vector<GapSample> Geometry::candidates(const std::vector<Pose2>& poses,
                                            double margin) const {
  std::vector<GapSample> out;
  auto consider = [&](const ContactKey& key) {
    if (auto s = evaluate(key, poses); s && s->gap < margin) out.push_back(*s);
  };
  const int n = static_cast<int>(bodies_.size());
  for (int a = 0; a < n; ++a) {
    const BodyShape& s = bodies_[a];
    const int nf = static_cast<int>(s.features.size());
    for (int k = 0; k < static_cast<int>(segments_.size()); ++k) {
      for (int f = 0; f < nf; ++f) consider({a, f, OtherKind::kSegment, k, -1});
    }
    for (int k = 0; k < static_cast<int>(obstacles_.size()); ++k) {
      Vec2 ignored;
      double far = box_sdf(obstacles_[k].min, obstacles_[k].max, poses[a].position(), &ignored);
      if (far - s.bound > margin) continue;
      for (int f = 0; f < nf; ++f) consider({a, f, OtherKind::kObstacle, k, -1});
      if (!s.round) {
        for (int c = 0; c < 4; ++c) consider({a, -1, OtherKind::kObstacle, k, c});
      }
    }
    for (int b = a + 1; b < n; ++b) {
      if (!collide(a, b)) continue;
      const BodyShape& t = bodies_[b];
      if (norm(poses[a].position() - poses[b].position()) - s.bound - t.bound > margin) continue;
      bool forward = true, reverse = true;
      if (s.round && t.round) {
        // One direction already gives the exact gap when a disc is involved.
        if (std::holds_alternative<DiscShape>(s.shape)) {
          reverse = false;
        } else if (std::holds_alternative<DiscShape>(t.shape)) {
          forward = false;
        }
      }
      if (forward) {
        for (int f = 0; f < nf; ++f) consider({a, f, OtherKind::kBody, b, -1});
      }
      if (reverse) {
        for (int f = 0; f < static_cast<int>(t.features.size()); ++f) {
          consider({a, -1, OtherKind::kBody, b, f});
        }
      }
    }
  }
  return out;
}

std::string Geometry::label_a(const ContactKey& key) const { return bodies_[key.body].id; }

std::string Geometry::label_b(const ContactKey& key) const {
  switch (key.kind) {
    case OtherKind::kSegment:
      return segments_[key.other].id;
    case OtherKind::kObstacle:
      return obstacles_[key.other].id;
    case OtherKind::kBody:
      return bodies_[key.other].id;
    case OtherKind::kLimit:
      break;
  }
  return "";
}

double Geometry::friction(const ContactKey& key) const {
  switch (key.kind) {
    case OtherKind::kSegment:
      return segments_[key.other].material.friction;
    case OtherKind::kObstacle:
      return obstacles_[key.other].material.friction;
    case OtherKind::kBody:
      return std::sqrt(bodies_[key.body].material.friction *
                       bodies_[key.other].material.friction);
    case OtherKind::kLimit:
      break;
  }
  return 0.0;
}

double Geometry::restitution(const ContactKey& key) const {
  switch (key.kind) {
    case OtherKind::kSegment:
      return segments_[key.other].material.restitution;
    case OtherKind::kObstacle:
      return obstacles_[key.other].material.restitution;
    case OtherKind::kBody:
      return std::min(bodies_[key.body].material.restitution,
                      bodies_[key.other].material.restitution);
    case OtherKind::kLimit:
      break;
  }
  return 0.0;
}

}  // namespace partrace
