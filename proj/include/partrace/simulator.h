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

// Event-driven time stepping.
//
// Each substep solves the velocity-level contact problem for the active
// contacts over the remaining step, moves positions with the trapezoidal
// rule, and scans the interpolated path
//
//   q(s) = q + s v + s^2 / (2 tau) (v+ - v),   0 < s <= tau
//
// for the earliest gap function crossing zero. The substep is cut there and
// the next one starts with an impact. Liftoff and stick/slip switches are
// read from the solver result and reported at substep resolution.

#ifndef PARTRACE_SIMULATOR_H_
#define PARTRACE_SIMULATOR_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "partrace/contact_solver.h"
#include "partrace/geometry.h"
#include "partrace/multibody.h"

namespace partrace {

struct SimSettings {
  double penetration_tolerance = 1e-6;
  double activation_tolerance = 1e-6;
  double event_tolerance = 1e-8;
  double broadphase_margin = 1e-2;
  double max_projection = 1e-6;  // per step, along each contact normal
  double zeno_interval = 1e-4;
  double zeno_speed = 1e-3;
  int scan_samples = 8;
  int max_substeps = 2000;  // per step
  // Remove spurious energy gained by the discretization when no generalized
  // force is applied (see docs/simulation.md).
  bool passive_energy_clamp = true;
  SolverSettings solver;
};

struct ContactPoint {
  ContactKey key;
  std::string body_a;
  std::string body_b;
  Vec2 point;
  Vec2 normal;
  double gap = 0.0;
  ContactMode mode = ContactMode::kSticking;
};

enum class EventKind { kImpact, kLiftoff, kStickToSlip, kSlipToStick, kJointLimitHit };

const char* event_kind_name(EventKind kind);
// Throws std::invalid_argument for unknown names.
EventKind parse_event_kind(const std::string& name);

struct ContactEvent {
  double t = 0.0;
  EventKind kind = EventKind::kImpact;
  std::string pair_a;
  std::string pair_b;
  Vec2 point;
  double normal_impulse = 0.0;
  friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

struct SimState {
  double t = 0.0;
  Vector q;
  Vector qdot;
  std::vector<ContactPoint> active_contacts;
};

// Per-substep diagnostics for invariant checks.
struct StepRecord {
  double t0 = 0.0;
  double t1 = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  bool passive = false;
  double solver_residual = 0.0;  // worst over the solves of this substep
  double min_gap = 0.0;          // over all candidates at t1
  int contacts = 0;
};

class Simulator {
 public:
  explicit Simulator(const ScenarioSpec& truth, SimSettings settings = {});

  const Multibody& multibody() const { return body_; }
  const Geometry& geometry() const { return geometry_; }
  const SimSettings& settings() const { return settings_; }

  // State at t = 0 from the bodies' initial poses: penetrations are projected
  // out, touching contacts become active, approaching ones impact (events).
  SimState initial_state(std::vector<ContactEvent>& events);

  // Advances to t_end with generalized force u held constant.
  // Throws SolverError on solver failure or event accumulation.
  void advance(SimState& state, double t_end, const Vector& u, std::vector<ContactEvent>& events);

  // All gap functions below the broadphase margin, joint limits included.
  std::vector<ContactPoint> gap_functions(const SimState& state) const;

  double energy(const SimState& state) const { return body_.energy(state.q, state.qdot); }

  void set_step_observer(std::function<void(const StepRecord&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  struct Row {
    ContactKey key;
    GapSample sample;
    ContactRow row;
    double restitution = 0.0;
  };

  std::vector<Pose2> poses(const Vector& q) const;
  std::vector<GapSample> all_candidates(const Vector& q, double margin) const;
  std::optional<GapSample> evaluate(const ContactKey& key, const Vector& q,
                                    const std::vector<Pose2>& poses) const;
  Row make_row(const GapSample& s, const std::vector<BodyKinematics>& kin) const;
  std::string label_a(const ContactKey& key) const;
  std::string label_b(const ContactKey& key) const;
  bool is_limit(const ContactKey& key) const { return key.kind == OtherKind::kLimit; }

  // Resolves impacts of contacts touching at the current time; returns the
  // worst solver residual.
  double handle_arrivals(SimState& state, std::vector<ContactEvent>& events);
  double substep(SimState& state, double tau, const Vector& u, std::vector<ContactEvent>& events);
  void project(SimState& state, double limit) const;
  bool pair_active(const SimState& state, const ContactKey& key) const;

  ScenarioSpec spec_;
  SimSettings settings_;
  Multibody body_;
  Geometry geometry_;
  std::vector<int> limit_coordinate_;  // per joint, -1 when unlimited
  std::map<std::pair<std::string, std::string>, double> last_impact_;
  std::function<void(const StepRecord&)> observer_;
};

}  // namespace partrace

#endif  // PARTRACE_SIMULATOR_H_
