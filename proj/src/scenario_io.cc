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

#include "partrace/scenario_io.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace partrace {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& message) {
  throw ScenarioError(ScenarioError::Kind::kValidation, path, path + ": " + message);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) bad(path, "must be finite");
  return v;
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected true or false");
  return j.get<bool>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  auto v = j.get<long long>();
  if (v < -(1LL << 30) || v > (1LL << 30)) bad(path, "integer out of range");
  return static_cast<int>(v);
}

const json& array(const json& j, const std::string& path, size_t size = 0) {
  if (!j.is_array()) bad(path, "expected an array");
  if (size && j.size() != size) bad(path, "expected " + std::to_string(size) + " entries");
  return j;
}

Vec2 vec2(const json& j, const std::string& path) {
  array(j, path, 2);
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

Pose2 pose(const json& j, const std::string& path) {
  array(j, path, 3);
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

// Object reader that rejects keys nobody asked for, so typos surface as errors.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) bad(path_, "expected an object");
  }

  const json& req(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) bad(sub(key), "missing required key");
    return *it;
  }
  const json* opt(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string sub(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) bad(sub(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Material material(Obj& o, Material fallback, bool required) {
  Material m = fallback;
  if (required) {
    m.friction = number(o.req("friction"), o.sub("friction"));
    m.restitution = number(o.req("restitution"), o.sub("restitution"));
  } else {
    if (auto* f = o.opt("friction")) m.friction = number(*f, o.sub("friction"));
    if (auto* r = o.opt("restitution")) m.restitution = number(*r, o.sub("restitution"));
  }
  return m;
}

Shape shape(const json& j, const std::string& path) {
  Obj o(j, path);
  std::string kind = text(o.req("kind"), o.sub("kind"));
  Shape out;
  if (kind == "disc") {
    out = DiscShape{number(o.req("radius"), o.sub("radius"))};
  } else if (kind == "capsule") {
    out = CapsuleShape{number(o.req("half_length"), o.sub("half_length")),
                       number(o.req("radius"), o.sub("radius"))};
  } else if (kind == "polygon") {
    PolygonShape poly;
    const json& verts = array(o.req("vertices"), o.sub("vertices"));
    for (size_t i = 0; i < verts.size(); ++i) {
      poly.vertices.push_back(vec2(verts[i], o.sub("vertices") + "[" + std::to_string(i) + "]"));
    }
    out = poly;
  } else if (kind == "regular_polygon") {
    RegularPolygon r;
    r.sides = integer(o.req("sides"), o.sub("sides"));
    r.radius = number(o.req("radius"), o.sub("radius"));
    if (auto* p = o.opt("phase")) r.phase = number(*p, o.sub("phase"));
    out = PolygonShape{{}, r};
  } else {
    bad(o.sub("kind"), "unknown shape '" + kind + "'");
  }
  o.finish();
  return out;
}

Body body(const json& j, const std::string& path) {
  Obj o(j, path);
  Body b;
  b.id = text(o.req("id"), o.sub("id"));
  b.mass = number(o.req("mass"), o.sub("mass"));
  b.inertia = number(o.req("inertia"), o.sub("inertia"));
  b.shape = shape(o.req("shape"), o.sub("shape"));
  if (auto* c = o.opt("com")) b.com = vec2(*c, o.sub("com"));
  if (auto* p = o.opt("pose")) b.initial_pose = pose(*p, o.sub("pose"));
  if (auto* v = o.opt("velocity")) b.initial_velocity = pose(*v, o.sub("velocity"));
  b.material = material(o, Material{}, false);
  if (auto* g = o.opt("collision_group")) b.collision_group = integer(*g, o.sub("collision_group"));
  o.finish();
  return b;
}

Joint joint(const json& j, const std::string& path) {
  Obj o(j, path);
  Joint jt;
  jt.id = text(o.req("id"), o.sub("id"));
  jt.parent = text(o.req("parent"), o.sub("parent"));
  jt.child = text(o.req("child"), o.sub("child"));
  std::string kind = text(o.req("kind"), o.sub("kind"));
  if (kind == "revolute") {
    jt.kind = JointKind::kRevolute;
  } else if (kind == "prismatic") {
    jt.kind = JointKind::kPrismatic;
  } else {
    bad(o.sub("kind"), "unknown joint kind '" + kind + "'");
  }
  if (auto* a = o.opt("anchor_parent")) jt.anchor_parent = vec2(*a, o.sub("anchor_parent"));
  if (auto* a = o.opt("anchor_child")) jt.anchor_child = vec2(*a, o.sub("anchor_child"));
  if (auto* a = o.opt("axis")) jt.axis = vec2(*a, o.sub("axis"));
  if (auto* l = o.opt("limits")) {
    array(*l, o.sub("limits"), 2);
    jt.limits = JointLimits{number((*l)[0], o.sub("limits") + "[0]"),
                            number((*l)[1], o.sub("limits") + "[1]")};
  }
  if (auto* a = o.opt("actuated")) jt.actuated = boolean(*a, o.sub("actuated"));
  if (auto* e = o.opt("effort_limit")) jt.effort_limit = number(*e, o.sub("effort_limit"));
  o.finish();
  return jt;
}

ControllerSpec controller(const json& j, const std::string& path) {
  Obj o(j, path);
  ControllerSpec c;
  c.kind = text(o.req("kind"), o.sub("kind"));
  if (auto* p = o.opt("params")) {
    if (!p->is_object()) bad(o.sub("params"), "expected an object");
    for (auto it = p->begin(); it != p->end(); ++it) {
      c.params[it.key()] = number(it.value(), o.sub("params") + "." + it.key());
    }
  }
  if (auto* p = o.opt("joints")) {
    if (!p->is_object()) bad(o.sub("joints"), "expected an object");
    for (auto it = p->begin(); it != p->end(); ++it) {
      c.joints[it.key()] = text(it.value(), o.sub("joints") + "." + it.key());
    }
  }
  if (auto* p = o.opt("trajectories")) {
    if (!p->is_object()) bad(o.sub("trajectories"), "expected an object");
    for (auto it = p->begin(); it != p->end(); ++it) {
      const std::string tpath = o.sub("trajectories") + "." + it.key();
      auto& points = c.trajectories[it.key()];
      for (size_t i = 0; i < array(it.value(), tpath).size(); ++i) {
        Vec2 tq = vec2(it.value()[i], tpath + "[" + std::to_string(i) + "]");
        points.emplace_back(tq.x, tq.y);
      }
    }
  }
  o.finish();
  return c;
}

ParamDistribution distribution(const json& j, const std::string& path) {
  Obj o(j, path);
  ParamDistribution d;
  d.target = text(o.req("target"), o.sub("target"));
  std::string kind = text(o.req("kind"), o.sub("kind"));
  if (kind == "normal") {
    d.kind = DistributionKind::kNormal;
    if (auto* m = o.opt("mean")) d.mean = number(*m, o.sub("mean"));
    const json* s = o.opt("sigma");
    const json* r = o.opt("sigma_rel");
    if ((s == nullptr) == (r == nullptr)) bad(path, "give exactly one of sigma, sigma_rel");
    if (s) d.sigma = number(*s, o.sub("sigma"));
    if (r) d.sigma_rel = number(*r, o.sub("sigma_rel"));
    if (auto* t = o.opt("truncation")) d.truncation = number(*t, o.sub("truncation"));
  } else if (kind == "uniform") {
    d.kind = DistributionKind::kUniform;
    d.lo = number(o.req("lo"), o.sub("lo"));
    d.hi = number(o.req("hi"), o.sub("hi"));
  } else {
    bad(o.sub("kind"), "unknown distribution '" + kind + "'");
  }
  if (auto* p = o.opt("phase")) {
    std::string phase = text(*p, o.sub("phase"));
    if (phase == "initial") {
      d.phase = SamplePhase::kInitial;
    } else if (phase == "per_step") {
      d.phase = SamplePhase::kPerStep;
    } else {
      bad(o.sub("phase"), "expected initial or per_step");
    }
  }
  if (auto* m = o.opt("mode")) {
    std::string mode = text(*m, o.sub("mode"));
    if (mode == "additive") {
      d.mode = OffsetMode::kAdditive;
    } else if (mode == "multiplicative") {
      d.mode = OffsetMode::kMultiplicative;
    } else {
      bad(o.sub("mode"), "expected additive or multiplicative");
    }
  }
  o.finish();
  return d;
}

OutcomePredicateSpec outcome(const json& j, const std::string& path) {
  Obj o(j, path);
  std::string kind = text(o.req("kind"), o.sub("kind"));
  OutcomePredicateSpec out;
  if (kind == "timeout") {
    out = TimeoutPredicate{};
  } else if (kind == "fall") {
    out = FallPredicate{text(o.req("body"), o.sub("body")),
                        number(o.req("roll_threshold"), o.sub("roll_threshold"))};
  } else if (kind == "stall") {
    out = StallPredicate{text(o.req("body"), o.sub("body")),
                         integer(o.req("direction"), o.sub("direction"))};
  } else if (kind == "region") {
    out = RegionPredicate{text(o.req("body"), o.sub("body")), vec2(o.req("min"), o.sub("min")),
                          vec2(o.req("max"), o.sub("max")),
                          number(o.req("at_time"), o.sub("at_time"))};
  } else if (kind == "collision") {
    out = CollisionPredicate{text(o.req("body"), o.sub("body")),
                             text(o.req("obstacle"), o.sub("obstacle"))};
  } else {
    bad(o.sub("kind"), "unknown outcome '" + kind + "'");
  }
  o.finish();
  return out;
}

ScenarioSpec from_json(const json& root) {
  Obj o(root, "");
  ScenarioSpec s;
  s.name = text(o.req("name"), "name");
  if (auto* g = o.opt("gravity")) s.gravity = vec2(*g, "gravity");
  s.duration = number(o.req("duration"), "duration");
  s.timestep = number(o.req("timestep"), "timestep");
  s.control_rate = number(o.req("control_rate"), "control_rate");
  if (auto* t = o.opt("telemetry_rate")) s.telemetry_rate = number(*t, "telemetry_rate");
  if (auto* l = o.opt("control_lag")) s.control_lag = number(*l, "control_lag");
  const json& bodies = array(o.req("bodies"), "bodies");
  for (size_t i = 0; i < bodies.size(); ++i) {
    s.bodies.push_back(body(bodies[i], "bodies[" + std::to_string(i) + "]"));
  }
  if (auto* joints = o.opt("joints")) {
    for (size_t i = 0; i < array(*joints, "joints").size(); ++i) {
      s.joints.push_back(joint((*joints)[i], "joints[" + std::to_string(i) + "]"));
    }
  }
  if (auto* terrain = o.opt("terrain")) {
    Obj t(*terrain, "terrain");
    if (auto* segs = t.opt("segments")) {
      for (size_t i = 0; i < array(*segs, "terrain.segments").size(); ++i) {
        const std::string path = "terrain.segments[" + std::to_string(i) + "]";
        Obj so((*segs)[i], path);
        TerrainSegment seg;
        seg.id = text(so.req("id"), so.sub("id"));
        seg.a = vec2(so.req("a"), so.sub("a"));
        seg.b = vec2(so.req("b"), so.sub("b"));
        seg.material = material(so, Material{}, true);
        so.finish();
        s.terrain.segments.push_back(seg);
      }
    }
    if (auto* obs = t.opt("obstacles")) {
      for (size_t i = 0; i < array(*obs, "terrain.obstacles").size(); ++i) {
        const std::string path = "terrain.obstacles[" + std::to_string(i) + "]";
        Obj oo((*obs)[i], path);
        Obstacle ob;
        ob.id = text(oo.req("id"), oo.sub("id"));
        ob.min = vec2(oo.req("min"), oo.sub("min"));
        ob.max = vec2(oo.req("max"), oo.sub("max"));
        ob.material = material(oo, Material{}, true);
        oo.finish();
        s.terrain.obstacles.push_back(ob);
      }
    }
    t.finish();
  }
  if (auto* c = o.opt("controller")) s.controller = controller(*c, "controller");
  if (auto* ds = o.opt("distributions")) {
    for (size_t i = 0; i < array(*ds, "distributions").size(); ++i) {
      s.distributions.push_back(
          distribution((*ds)[i], "distributions[" + std::to_string(i) + "]"));
    }
  }
  if (auto* out = o.opt("outcome")) s.outcome = outcome(*out, "outcome");
  o.finish();
  return s;
}

json to_json(Vec2 v) { return json::array({v.x, v.y}); }
json to_json(const Pose2& p) { return json::array({p.x, p.y, p.theta}); }

json to_json(const Shape& shape) {
  json j;
  if (auto* d = std::get_if<DiscShape>(&shape)) {
    j = {{"kind", "disc"}, {"radius", d->radius}};
  } else if (auto* c = std::get_if<CapsuleShape>(&shape)) {
    j = {{"kind", "capsule"}, {"half_length", c->half_length}, {"radius", c->radius}};
  } else {
    const auto& p = std::get<PolygonShape>(shape);
    if (p.regular) {
      j = {{"kind", "regular_polygon"},
           {"sides", p.regular->sides},
           {"radius", p.regular->radius},
           {"phase", p.regular->phase}};
    } else {
      json verts = json::array();
      for (Vec2 v : p.vertices) verts.push_back(to_json(v));
      j = {{"kind", "polygon"}, {"vertices", verts}};
    }
  }
  return j;
}

json to_json(const ScenarioSpec& s) {
  json root;
  root["name"] = s.name;
  root["gravity"] = to_json(s.gravity);
  root["duration"] = s.duration;
  root["timestep"] = s.timestep;
  root["control_rate"] = s.control_rate;
  root["telemetry_rate"] = s.telemetry_rate;
  root["control_lag"] = s.control_lag;
  json bodies = json::array();
  for (const Body& b : s.bodies) {
    bodies.push_back({{"id", b.id},
                      {"mass", b.mass},
                      {"inertia", b.inertia},
                      {"shape", to_json(b.shape)},
                      {"com", to_json(b.com)},
                      {"pose", to_json(b.initial_pose)},
                      {"velocity", to_json(b.initial_velocity)},
                      {"friction", b.material.friction},
                      {"restitution", b.material.restitution},
                      {"collision_group", b.collision_group}});
  }
  root["bodies"] = bodies;
  json joints = json::array();
  for (const Joint& j : s.joints) {
    json jj = {{"id", j.id},
               {"parent", j.parent},
               {"child", j.child},
               {"kind", j.kind == JointKind::kRevolute ? "revolute" : "prismatic"},
               {"anchor_parent", to_json(j.anchor_parent)},
               {"anchor_child", to_json(j.anchor_child)},
               {"axis", to_json(j.axis)},
               {"actuated", j.actuated}};
    if (j.limits) jj["limits"] = json::array({j.limits->lower, j.limits->upper});
    if (std::isfinite(j.effort_limit)) jj["effort_limit"] = j.effort_limit;
    joints.push_back(jj);
  }
  root["joints"] = joints;
  json segs = json::array();
  for (const TerrainSegment& t : s.terrain.segments) {
    segs.push_back({{"id", t.id},
                    {"a", to_json(t.a)},
                    {"b", to_json(t.b)},
                    {"friction", t.material.friction},
                    {"restitution", t.material.restitution}});
  }
  json obs = json::array();
  for (const Obstacle& o : s.terrain.obstacles) {
    obs.push_back({{"id", o.id},
                   {"min", to_json(o.min)},
                   {"max", to_json(o.max)},
                   {"friction", o.material.friction},
                   {"restitution", o.material.restitution}});
  }
  root["terrain"] = {{"segments", segs}, {"obstacles", obs}};
  json traj = json::object();
  for (const auto& [joint, points] : s.controller.trajectories) {
    json pts = json::array();
    for (const auto& [t, q] : points) pts.push_back(json::array({t, q}));
    traj[joint] = pts;
  }
  root["controller"] = {{"kind", s.controller.kind},
                        {"params", json(s.controller.params)},
                        {"joints", json(s.controller.joints)},
                        {"trajectories", traj}};
  json dists = json::array();
  for (const ParamDistribution& d : s.distributions) {
    json dj = {{"target", d.target},
               {"phase", d.phase == SamplePhase::kInitial ? "initial" : "per_step"},
               {"mode", d.mode == OffsetMode::kAdditive ? "additive" : "multiplicative"}};
    if (d.kind == DistributionKind::kNormal) {
      dj["kind"] = "normal";
      dj["mean"] = d.mean;
      if (d.sigma_rel) {
        dj["sigma_rel"] = *d.sigma_rel;
      } else {
        dj["sigma"] = d.sigma;
      }
      dj["truncation"] = d.truncation;
    } else {
      dj["kind"] = "uniform";
      dj["lo"] = d.lo;
      dj["hi"] = d.hi;
    }
    dists.push_back(dj);
  }
  root["distributions"] = dists;
  json out;
  if (std::holds_alternative<TimeoutPredicate>(s.outcome)) {
    out = {{"kind", "timeout"}};
  } else if (auto* f = std::get_if<FallPredicate>(&s.outcome)) {
    out = {{"kind", "fall"}, {"body", f->body}, {"roll_threshold", f->roll_threshold}};
  } else if (auto* st = std::get_if<StallPredicate>(&s.outcome)) {
    out = {{"kind", "stall"}, {"body", st->body}, {"direction", st->direction}};
  } else if (auto* r = std::get_if<RegionPredicate>(&s.outcome)) {
    out = {{"kind", "region"},
           {"body", r->body},
           {"min", to_json(r->min)},
           {"max", to_json(r->max)},
           {"at_time", r->at_time}};
  } else if (auto* c = std::get_if<CollisionPredicate>(&s.outcome)) {
    out = {{"kind", "collision"}, {"body", c->body}, {"obstacle", c->obstacle}};
  }
  root["outcome"] = out;
  return root;
}

}  // namespace

ScenarioSpec load_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based index of the byte that stopped the parser.
    size_t stop = e.byte == 0 ? 0 : std::min<size_t>(e.byte - 1, text.size());
    int line = 1, column = 1;
    for (size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ScenarioError(ScenarioError::Kind::kParse, "",
                        "parse error at line " + std::to_string(line) + ", column " +
                            std::to_string(column) + ": " + e.what(),
                        line, column);
  }
  ScenarioSpec spec;
  try {
    spec = from_json(root);
  } catch (const json::exception& e) {
    throw ScenarioError(ScenarioError::Kind::kValidation, "", e.what());
  }
  validate_scenario(spec);
  return spec;
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path, std::string* bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError(ScenarioError::Kind::kParse, path.string(),
                        "cannot open scenario file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string contents = buf.str();
  ScenarioSpec spec = load_scenario(contents);
  if (bytes) *bytes = std::move(contents);
  return spec;
}

std::string serialize_scenario(const ScenarioSpec& spec) { return to_json(spec).dump(2) + "\n"; }

std::filesystem::path bundled_scenario_path(const std::string& name) {
  return std::filesystem::path(PARTRACE_SCENARIO_DIR) / (name + ".json");
}

}  // namespace partrace
