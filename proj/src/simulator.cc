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

#include "partrace/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace partrace {
namespace {

// Normal speeds below this are treated as resting rather than arriving.
constexpr double kRestingSpeed = 1e-9;
// A contact leaves the active set when it carries no load and its normal
// velocity points away from the surface by more than this (m/s). A negative
// gap-closing target alone does not count as separation.
constexpr double kSeparationSpeed = 1e-9;
// A contact on the friction bound without slip still sticks.
constexpr double kSlipSpeed = 1e-9;
constexpr double kGoldenRatio = 0.6180339887498949;

bool same_pair(const ContactKey& a, const ContactKey& b) {
  return a.body == b.body && a.kind == b.kind && a.other == b.other;
}

}  // namespace

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::kImpact:
      return "impact";
    case EventKind::kLiftoff:
      return "liftoff";
    case EventKind::kStickToSlip:
      return "stick_to_slip";
    case EventKind::kSlipToStick:
      return "slip_to_stick";
    case EventKind::kJointLimitHit:
      return "joint_limit_hit";
  }
  return "unknown";
}

EventKind parse_event_kind(const std::string& name) {
  for (EventKind k : {EventKind::kImpact, EventKind::kLiftoff, EventKind::kStickToSlip,
                      EventKind::kSlipToStick, EventKind::kJointLimitHit}) {
    if (name == event_kind_name(k)) return k;
  }
  throw std::invalid_argument("unknown event kind '" + name + "'");
}

Simulator::Simulator(const ScenarioSpec& truth, SimSettings settings)
    : spec_(truth), settings_(settings), body_(truth), geometry_(truth) {
  for (const Joint& j : truth.joints) {
    limit_coordinate_.push_back(j.limits ? body_.joint_coordinate(j.id) : -1);
  }
}

std::vector<Pose2> Simulator::poses(const Vector& q) const {
  std::vector<Pose2> out;
  body_.poses(q, out);
  return out;
}

std::optional<GapSample> Simulator::evaluate(const ContactKey& key, const Vector& q,
                                             const std::vector<Pose2>& poses) const {
  if (!is_limit(key)) return geometry_.evaluate(key, poses);
  const Joint& j = spec_.joints[key.other];
  const int c = limit_coordinate_[key.other];
  GapSample s;
  s.key = key;
  s.point = poses[key.body].position();
  s.normal = {0.0, 0.0};
  s.gap = key.feature_b == 0 ? q[c] - j.limits->lower : j.limits->upper - q[c];
  return s;
}

std::vector<GapSample> Simulator::all_candidates(const Vector& q, double margin) const {
  std::vector<Pose2> p = poses(q);
  std::vector<GapSample> out = geometry_.candidates(p, margin);
  for (size_t j = 0; j < spec_.joints.size(); ++j) {
    if (limit_coordinate_[j] < 0) continue;
    int child = spec_.body_index(spec_.joints[j].child);
    for (int side = 0; side < 2; ++side) {
      ContactKey key{child, 0, OtherKind::kLimit, static_cast<int>(j), side};
      auto s = evaluate(key, q, p);
      if (s->gap < margin) out.push_back(*s);
    }
  }
  return out;
}

Simulator::Row Simulator::make_row(const GapSample& s,
                                   const std::vector<BodyKinematics>& kin) const {
  Row r;
  r.key = s.key;
  r.sample = s;
  const int dof = body_.dof();
  if (is_limit(s.key)) {
    const int c = limit_coordinate_[s.key.other];
    r.row.jn = RowVector::Zero(dof);
    r.row.jn[c] = s.key.feature_b == 0 ? 1.0 : -1.0;
    r.row.jt = RowVector::Zero(dof);
    r.row.mu = 0.0;
    r.restitution = 0.0;
    return r;
  }
  Jacobian2 jrel = body_.point_jacobian(kin, s.key.body, s.point);
  if (int b = geometry_.other_body(s.key); b >= 0) jrel -= body_.point_jacobian(kin, b, s.point);
  Vec2 t = perp(s.normal);
  r.row.jn = s.normal.x * jrel.row(0) + s.normal.y * jrel.row(1);
  r.row.jt = t.x * jrel.row(0) + t.y * jrel.row(1);
  r.row.mu = geometry_.friction(s.key);
  r.restitution = geometry_.restitution(s.key);
  return r;
}

std::string Simulator::label_a(const ContactKey& key) const { return geometry_.label_a(key); }

std::string Simulator::label_b(const ContactKey& key) const {
  if (is_limit(key)) return spec_.joints[key.other].id;
  return geometry_.label_b(key);
}

bool Simulator::pair_active(const SimState& state, const ContactKey& key) const {
  for (const ContactPoint& c : state.active_contacts) {
    if (same_pair(c.key, key)) return true;
  }
  return false;
}

SimState Simulator::initial_state(std::vector<ContactEvent>& events) {
  SimState state;
  body_.initial_state(state.q, state.qdot);
  last_impact_.clear();
  project(state, std::numeric_limits<double>::infinity());
  std::vector<BodyKinematics> kin;
  body_.kinematics(state.q, state.qdot, kin);
  for (const GapSample& s : all_candidates(state.q, settings_.activation_tolerance)) {
    if (s.gap > settings_.activation_tolerance) continue;
    Row r = make_row(s, kin);
    if (std::abs(r.row.jn.dot(state.qdot)) > kRestingSpeed) continue;
    state.active_contacts.push_back(
        {s.key, label_a(s.key), label_b(s.key), s.point, s.normal, s.gap, ContactMode::kSticking});
  }
  handle_arrivals(state, events);
  return state;
}

double Simulator::handle_arrivals(SimState& state, std::vector<ContactEvent>& events) {
  const double act = settings_.activation_tolerance;
  std::vector<Pose2> p = poses(state.q);
  std::vector<BodyKinematics> kin;
  body_.kinematics(state.q, state.qdot, kin);
  std::set<ContactKey> active;
  for (const ContactPoint& c : state.active_contacts) active.insert(c.key);

  std::vector<Row> arrivals, touchdowns;
  for (const GapSample& s : all_candidates(state.q, act)) {
    if (s.gap > act || active.count(s.key)) continue;
    Row r = make_row(s, kin);
    double vn = r.row.jn.dot(state.qdot);
    if (vn < -kRestingSpeed) {
      const std::pair<std::string, std::string> pair{label_a(s.key), label_b(s.key)};
      auto last = last_impact_.find(pair);
      if (last != last_impact_.end() && state.t - last->second < settings_.zeno_interval &&
          -vn < settings_.zeno_speed) {
        r.restitution = 0.0;
      }
      arrivals.push_back(r);
    } else if (vn <= kRestingSpeed && s.gap <= 2.0 * settings_.event_tolerance) {
      touchdowns.push_back(r);
    }
  }
  if (arrivals.empty() && touchdowns.empty()) return 0.0;

  double residual = 0.0;
  std::vector<ContactMode> arrival_modes(arrivals.size(), ContactMode::kSticking);
  std::vector<double> arrival_vn(arrivals.size(), 0.0);
  std::vector<double> arrival_impulse(arrivals.size(), 0.0);
  if (!arrivals.empty()) {
    std::vector<ContactRow> rows;
    std::vector<double> restitution;
    for (const ContactPoint& c : state.active_contacts) {
      auto s = evaluate(c.key, state.q, p);
      if (!s) continue;
      rows.push_back(make_row(*s, kin).row);
      rows.back().target = 0.0;
      restitution.push_back(-1.0);
    }
    for (const Row& r : touchdowns) {
      rows.push_back(r.row);
      rows.back().target = 0.0;
      restitution.push_back(-1.0);
    }
    const size_t first = rows.size();
    for (const Row& r : arrivals) {
      rows.push_back(r.row);
      restitution.push_back(r.restitution);
    }
    Dynamics dyn = body_.dynamics(state.q, state.qdot);
    ContactSolution sol = resolve_impact(dyn.mass, rows, restitution, state.qdot, settings_.solver);
    residual = sol.residual;
    state.qdot = sol.qdot;
    for (size_t i = 0; i < arrivals.size(); ++i) {
      arrival_modes[i] = sol.modes[first + i];
      arrival_vn[i] = sol.normal_velocity[first + i];
      arrival_impulse[i] = std::max(0.0, sol.lambda_n[first + i]);
    }
  }

  std::set<std::pair<std::string, std::string>> reported;
  for (size_t i = 0; i < arrivals.size(); ++i) {
    const Row& r = arrivals[i];
    ContactEvent e;
    e.t = state.t;
    e.kind = is_limit(r.key) ? EventKind::kJointLimitHit : EventKind::kImpact;
    e.pair_a = label_a(r.key);
    e.pair_b = label_b(r.key);
    e.point = r.sample.point;
    e.normal_impulse = arrival_impulse[i];
    events.push_back(e);
    reported.insert({e.pair_a, e.pair_b});
    last_impact_[{e.pair_a, e.pair_b}] = state.t;
  }
  std::vector<ContactPoint> added;
  for (const Row& r : touchdowns) {
    std::pair<std::string, std::string> pair{label_a(r.key), label_b(r.key)};
    if (!pair_active(state, r.key) && !reported.count(pair)) {
      ContactEvent e;
      e.t = state.t;
      e.kind = is_limit(r.key) ? EventKind::kJointLimitHit : EventKind::kImpact;
      e.pair_a = pair.first;
      e.pair_b = pair.second;
      e.point = r.sample.point;
      events.push_back(e);
      reported.insert(pair);
    }
    added.push_back({r.key, pair.first, pair.second, r.sample.point, r.sample.normal, r.sample.gap,
                     ContactMode::kSticking});
  }
  for (size_t i = 0; i < arrivals.size(); ++i) {
    // Bouncing contacts stay out of the active set; they come back through
    // the event scan.
    if (arrival_vn[i] > kSeparationSpeed + 1e-7) continue;
    const Row& r = arrivals[i];
    ContactMode mode = arrival_modes[i] == ContactMode::kSeparating ? ContactMode::kSticking
                                                                    : arrival_modes[i];
    added.push_back({r.key, label_a(r.key), label_b(r.key), r.sample.point, r.sample.normal,
                     r.sample.gap, mode});
  }
  for (ContactPoint& c : added) state.active_contacts.push_back(std::move(c));
  std::sort(state.active_contacts.begin(), state.active_contacts.end(),
            [](const ContactPoint& a, const ContactPoint& b) { return a.key < b.key; });
  return residual;
}

void Simulator::project(SimState& state, double limit) const {
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<Pose2> p = poses(state.q);
    std::vector<GapSample> deep;
    for (const GapSample& s : all_candidates(state.q, 0.0)) {
      if (s.gap < 0.0) deep.push_back(s);
    }
    if (deep.empty()) return;
    std::vector<BodyKinematics> kin;
    body_.kinematics(state.q, state.qdot, kin);
    const int k = static_cast<int>(deep.size());
    Matrix J(k, body_.dof());
    Vector delta(k);
    for (int i = 0; i < k; ++i) {
      J.row(i) = make_row(deep[i], kin).row.jn;
      delta[i] = std::min(-deep[i].gap, limit);
    }
    Dynamics dyn = body_.dynamics(state.q, state.qdot);
    Eigen::LLT<Matrix> llt(dyn.mass);
    Matrix minv_jt = llt.solve(J.transpose());
    Matrix W = J * minv_jt;
    Vector mult = W.completeOrthogonalDecomposition().solve(delta);
    state.q += minv_jt * mult;
    if (std::isinf(limit)) continue;
    return;
  }
}

double Simulator::substep(SimState& state, double tau, const Vector& u,
                          std::vector<ContactEvent>& events) {
  double residual = handle_arrivals(state, events);
  const double t0 = state.t;
  const bool passive = u.isZero(0.0);
  const double e0 = energy(state);
  const Vector q = state.q;
  const Vector v = state.qdot;
  std::vector<Pose2> p0 = poses(q);
  std::vector<BodyKinematics> kin;
  body_.kinematics(q, v, kin);
  Dynamics dyn = body_.dynamics(q, v);
  Vector force = dyn.gravity + u - dyn.bias;

  // Active contacts at the substep start.
  std::vector<Row> rows;
  std::vector<ContactPoint> kept;
  std::set<std::pair<std::string, std::string>> dropped_pairs;
  for (const ContactPoint& c : state.active_contacts) {
    auto s = evaluate(c.key, q, p0);
    if (!s) {
      dropped_pairs.insert({c.body_a, c.body_b});
      continue;
    }
    Row r = make_row(*s, kin);
    double vn = r.row.jn.dot(v);
    r.row.target = std::min(0.0, -(2.0 * std::max(s->gap, 0.0) / tau + vn));
    rows.push_back(r);
    kept.push_back(c);
  }
  std::vector<ContactRow> contact_rows;
  for (const Row& r : rows) contact_rows.push_back(r.row);
  ContactSolution sol = solve_contact(dyn.mass, tau, contact_rows, v, force, settings_.solver);
  residual = std::max(residual, sol.residual);
  const Vector vplus = sol.qdot;
  auto path = [&](double s) -> Vector { return q + s * v + (s * s / (2.0 * tau)) * (vplus - v); };

  // Broadphase margin grows with how far any point can travel this substep.
  std::vector<BodyKinematics> kin_plus;
  body_.kinematics(q, vplus, kin_plus);
  double travel = 0.0;
  for (int b = 0; b < body_.body_count(); ++b) {
    for (const auto* k : {&kin[b], &kin_plus[b]}) {
      travel = std::max(travel, norm(k->velocity) + std::abs(k->omega) * geometry_.bounding_radius(b));
    }
  }
  const double margin = settings_.broadphase_margin + 1.5 * tau * travel +
                        tau * std::max(v.lpNorm<Eigen::Infinity>(), vplus.lpNorm<Eigen::Infinity>());

  std::set<ContactKey> active_keys;
  for (const ContactPoint& c : kept) active_keys.insert(c.key);
  const int samples = std::max(2, settings_.scan_samples);
  double event_s = tau;
  bool found = false;
  auto gap_at = [&](const ContactKey& key, double s) {
    Vector qs = path(s);
    auto g = evaluate(key, qs, poses(qs));
    return g ? g->gap : std::numeric_limits<double>::infinity();
  };
  // Golden-section search for the minimum (sign = 1) or maximum (sign = -1)
  // of a gap on [a, b], stopping as soon as the gap changes sign.
  auto extremum = [&](const ContactKey& key, double a, double b, double sign) {
    auto crossed = [&](double f) { return sign > 0.0 ? f <= 0.0 : f > 0.0; };
    double x1 = b - kGoldenRatio * (b - a), x2 = a + kGoldenRatio * (b - a);
    double f1 = gap_at(key, x1), f2 = gap_at(key, x2);
    for (int it = 0; it < 60 && !crossed(f1) && !crossed(f2) && b - a > 1e-15 * tau; ++it) {
      if (sign * f1 < sign * f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kGoldenRatio * (b - a);
        f1 = gap_at(key, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGoldenRatio * (b - a);
        f2 = gap_at(key, x2);
      }
    }
    return crossed(f1) ? std::pair{x1, f1} : std::pair{x2, f2};
  };
  for (const GapSample& cand : all_candidates(q, margin)) {
    if (active_keys.count(cand.key)) continue;
    const double step = tau / samples;
    double lo = -1.0, hi = -1.0;
    // Samples with a positive gap so far: (s, g) of the last two.
    double s_prev = 0.0, g_prev = cand.gap;
    double s_prev2 = -1.0, g_prev2 = 0.0;
    int k = 1;
    if (cand.gap <= 0.0) {
      // Touching but not held: the feature is leaving. It may hop and
      // land again inside the first sample interval.
      const double g1 = gap_at(cand.key, step);
      if (g1 <= 0.0) {
        auto [xm, fm] = extremum(cand.key, 0.0, step, -1.0);
        if (fm > 0.0) {
          lo = xm;
          hi = step;
        }
        k = samples + 1;
      } else {
        s_prev = step;
        g_prev = g1;
        k = 2;
      }
    }
    for (; k <= samples; ++k) {
      const double sk = step * k;
      if (s_prev >= event_s) break;
      const double gk = gap_at(cand.key, sk);
      if (gk <= 0.0) {
        lo = s_prev;
        hi = sk;
        break;
      }
      // A dip between samples can cross zero and come back (grazing).
      if (s_prev2 >= 0.0 && g_prev < g_prev2 && g_prev <= gk) {
        auto [xm, fm] = extremum(cand.key, s_prev2, sk, 1.0);
        if (fm <= 0.0) {
          lo = s_prev2;
          hi = xm;
          break;
        }
      }
      s_prev2 = s_prev;
      g_prev2 = g_prev;
      s_prev = sk;
      g_prev = gk;
    }
    if (hi < 0.0 || lo >= event_s) continue;
    // Bisection to |gap| <= event tolerance.
    double s_star = hi;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      double gm = gap_at(cand.key, mid);
      if (std::abs(gm) <= settings_.event_tolerance) {
        s_star = mid;
        break;
      }
      if (gm > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      s_star = hi;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t0 + hi)) break;
    }
    if (s_star < event_s) {
      event_s = s_star;
      found = true;
    }
  }

  const double s = found ? event_s : tau;
  state.q = path(s);
  state.qdot = v + (s / tau) * (vplus - v);
  state.t = t0 + s;

  // Liftoff and stick/slip transitions of the contacts that took part.
  std::vector<ContactPoint> next;
  std::vector<Pose2> p1 = poses(state.q);
  for (size_t i = 0; i < kept.size(); ++i) {
    ContactPoint c = kept[i];
    const bool separated = sol.lambda_n[i] <= 0.0 &&
                           sol.normal_velocity[i] > kSeparationSpeed;
    if (separated) {
      dropped_pairs.insert({c.body_a, c.body_b});
      continue;
    }
    ContactMode mode = sol.modes[i];
    if (mode == ContactMode::kSeparating) mode = c.mode;
    if (mode != ContactMode::kSticking && std::abs(sol.tangential_velocity[i]) <= kSlipSpeed) {
      mode = ContactMode::kSticking;
    }
    if (rows[i].row.mu > 0.0) {
      bool was_stick = c.mode == ContactMode::kSticking;
      bool is_stick = mode == ContactMode::kSticking;
      if (was_stick != is_stick) {
        events.push_back({state.t, was_stick ? EventKind::kStickToSlip : EventKind::kSlipToStick,
                          c.body_a, c.body_b, c.point, 0.0});
      }
    }
    c.mode = mode;
    if (auto g = evaluate(c.key, state.q, p1)) {
      c.point = g->point;
      c.normal = g->normal;
      c.gap = g->gap;
    }
    next.push_back(std::move(c));
  }
  state.active_contacts = std::move(next);
  for (const auto& pair : dropped_pairs) {
    bool still = false;
    for (const ContactPoint& c : state.active_contacts) {
      if (c.body_a == pair.first && c.body_b == pair.second) still = true;
    }
    bool is_limit_pair = false;
    for (const Joint& j : spec_.joints) {
      if (j.id == pair.second) is_limit_pair = true;
    }
    if (!still && !is_limit_pair) {
      Vec2 where;
      for (size_t i = 0; i < kept.size(); ++i) {
        if (kept[i].body_a == pair.first && kept[i].body_b == pair.second) where = kept[i].point;
      }
      events.push_back({state.t, EventKind::kLiftoff, pair.first, pair.second, where, 0.0});
    }
  }

  project(state, settings_.max_projection);

  if (passive && settings_.passive_energy_clamp) {
    double e1 = energy(state);
    if (e1 > e0) {
      double pe = body_.potential_energy(state.q);
      double ke = body_.kinetic_energy(state.q, state.qdot);
      double allowed = e0 - pe;
      if (allowed <= 0.0 || ke <= 0.0) {
        state.qdot.setZero();
      } else {
        state.qdot *= std::sqrt(allowed / ke);
      }
      // Rounding in the rescale may leave the energy a few ulps high.
      for (int i = 0; i < 4 && energy(state) > e0; ++i) state.qdot *= 1.0 - 1e-15;
    }
  }

  if (observer_) {
    StepRecord rec;
    rec.t0 = t0;
    rec.t1 = state.t;
    rec.energy_before = e0;
    rec.energy_after = energy(state);
    rec.passive = passive;
    rec.solver_residual = residual;
    rec.contacts = static_cast<int>(rows.size());
    double min_gap = std::numeric_limits<double>::infinity();
    for (const GapSample& g : all_candidates(state.q, settings_.broadphase_margin)) {
      min_gap = std::min(min_gap, g.gap);
    }
    rec.min_gap = min_gap;
    observer_(rec);
  }
  return residual;
}

void Simulator::advance(SimState& state, double t_end, const Vector& u,
                        std::vector<ContactEvent>& events) {
  int count = 0;
  while (t_end - state.t > 1e-12 * std::max(1.0, std::abs(t_end))) {
    substep(state, t_end - state.t, u, events);
    if (++count > settings_.max_substeps) {
      throw SolverError("event accumulation: more than " + std::to_string(settings_.max_substeps) +
                            " substeps before t = " + std::to_string(t_end),
                        0.0);
    }
  }
  state.t = t_end;
}

std::vector<ContactPoint> Simulator::gap_functions(const SimState& state) const {
  std::vector<ContactPoint> out;
  for (const GapSample& s : all_candidates(state.q, settings_.broadphase_margin)) {
    ContactPoint c{s.key, label_a(s.key), label_b(s.key), s.point, s.normal, s.gap,
                   ContactMode::kSeparating};
    for (const ContactPoint& a : state.active_contacts) {
      if (a.key == s.key) c.mode = a.mode;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace partrace
