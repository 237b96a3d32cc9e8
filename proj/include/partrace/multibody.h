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

// Planar tree of rigid bodies in reduced coordinates. Free bodies own three
// coordinates (x, y, theta); a body attached by a joint owns one (angle for
// revolute, slide for prismatic). Equations of motion:
//
//   M(q) qddot + h(q, qdot) = g(q) + u + J^T lambda

#ifndef PARTRACE_MULTIBODY_H_
#define PARTRACE_MULTIBODY_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "partrace/model.h"

namespace partrace {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Jacobian2 = Eigen::Matrix<double, 2, Eigen::Dynamic>;
using RowVector = Eigen::RowVectorXd;

// Frame-origin kinematics of one body.
struct BodyKinematics {
  Pose2 pose;
  Vec2 velocity;
  double omega = 0.0;
  Jacobian2 jac_origin;  // d(origin)/dq
  RowVector jac_theta;   // d(theta)/dq
  Vec2 bias_accel;       // origin acceleration when qddot = 0
  double bias_alpha = 0.0;
};

struct Dynamics {
  Matrix mass;
  Vector bias;     // h(q, qdot)
  Vector gravity;  // g(q)
};

class Multibody {
 public:
  explicit Multibody(const ScenarioSpec& spec);

  int dof() const { return dof_; }
  int body_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<std::string>& coordinate_names() const { return names_; }
  // Coordinate index of the joint, or -1.
  int joint_coordinate(const std::string& joint_id) const;
  // First coordinate of a body: its joint coordinate or its free x.
  int body_coordinate(int body) const { return nodes_[body].coordinate; }
  bool is_free(int body) const { return nodes_[body].joint < 0; }

  // Coordinates implied by the bodies' initial poses and velocities.
  void initial_state(Vector& q, Vector& qdot) const;

  void kinematics(const Vector& q, const Vector& qdot, std::vector<BodyKinematics>& out) const;
  void poses(const Vector& q, std::vector<Pose2>& out) const;
  Dynamics dynamics(const Vector& q, const Vector& qdot) const;

  // Jacobian of a world point rigidly attached to `body`.
  Jacobian2 point_jacobian(const std::vector<BodyKinematics>& kin, int body, Vec2 point) const;

  double kinetic_energy(const Vector& q, const Vector& qdot) const;
  double potential_energy(const Vector& q) const;
  double energy(const Vector& q, const Vector& qdot) const {
    return kinetic_energy(q, qdot) + potential_energy(q);
  }

 private:
  struct Node {
    int joint = -1;   // index into joints_, -1 for a free body
    int parent = -1;  // parent body, -1 for world or free
    int coordinate = 0;
    double mass = 0.0;
    double inertia = 0.0;
    Vec2 com;
  };

  std::vector<Node> nodes_;
  std::vector<int> order_;  // parents before children
  std::vector<Joint> joints_;
  std::vector<Pose2> initial_pose_;
  std::vector<Pose2> initial_velocity_;
  std::vector<std::string> names_;
  Vec2 gravity_;
  int dof_ = 0;
};

}  // namespace partrace

#endif  // PARTRACE_MULTIBODY_H_
