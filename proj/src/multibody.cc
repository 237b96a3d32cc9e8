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

#include "partrace/multibody.h"

#include <cmath>
#include <stdexcept>

namespace partrace {
namespace {

Eigen::Vector2d col(Vec2 v) { return {v.x, v.y}; }

}  // namespace

Multibody::Multibody(const ScenarioSpec& spec) : gravity_(spec.gravity) {
  const int n = static_cast<int>(spec.bodies.size());
  nodes_.resize(n);
  joints_ = spec.joints;
  for (Joint& j : joints_) {
    if (j.kind == JointKind::kPrismatic) j.axis = (1.0 / norm(j.axis)) * j.axis;
  }
  for (int b = 0; b < n; ++b) {
    const Body& body = spec.bodies[b];
    Node& node = nodes_[b];
    node.mass = body.mass;
    node.inertia = body.inertia;
    node.com = body.com;
    for (size_t j = 0; j < joints_.size(); ++j) {
      if (joints_[j].child == body.id) {
        node.joint = static_cast<int>(j);
        node.parent = joints_[j].parent == kWorld ? -1 : spec.body_index(joints_[j].parent);
      }
    }
    node.coordinate = dof_;
    if (node.joint >= 0) {
      names_.push_back(joints_[node.joint].id);
      dof_ += 1;
    } else {
      names_.push_back(body.id + ".x");
      names_.push_back(body.id + ".y");
      names_.push_back(body.id + ".theta");
      dof_ += 3;
    }
    initial_pose_.push_back(body.initial_pose);
    initial_velocity_.push_back(body.initial_velocity);
  }
  // Parents first; the joint graph is a validated forest.
  std::vector<bool> placed(n, false);
  while (static_cast<int>(order_.size()) < n) {
    bool progress = false;
    for (int b = 0; b < n; ++b) {
      if (placed[b]) continue;
      int p = nodes_[b].parent;
      if (p < 0 || placed[p]) {
        order_.push_back(b);
        placed[b] = true;
        progress = true;
      }
    }
    if (!progress) throw std::logic_error("kinematic loop in a validated scenario");
  }
}

int Multibody::joint_coordinate(const std::string& joint_id) const {
  for (const Node& node : nodes_) {
    if (node.joint >= 0 && joints_[node.joint].id == joint_id) return node.coordinate;
  }
  return -1;
}

void Multibody::initial_state(Vector& q, Vector& qdot) const {
  q = Vector::Zero(dof_);
  qdot = Vector::Zero(dof_);
  for (size_t b = 0; b < nodes_.size(); ++b) {
    const Node& node = nodes_[b];
    const Pose2& pc = initial_pose_[b];
    const Pose2& vc = initial_velocity_[b];
    if (node.joint < 0) {
      q.segment<3>(node.coordinate) << pc.x, pc.y, pc.theta;
      qdot.segment<3>(node.coordinate) << vc.x, vc.y, vc.theta;
      continue;
    }
    const Joint& j = joints_[node.joint];
    Pose2 pp, vp;
    if (node.parent >= 0) {
      pp = initial_pose_[node.parent];
      vp = initial_velocity_[node.parent];
    }
    if (j.kind == JointKind::kRevolute) {
      q[node.coordinate] = pc.theta - pp.theta;
      qdot[node.coordinate] = vc.theta - vp.theta;
    } else {
      Vec2 rc = rotate(pc.theta, j.anchor_child);
      Vec2 w = pc.position() + rc - pp.position();
      q[node.coordinate] = dot(j.axis, rotate(-pp.theta, w) - j.anchor_parent);
      Vec2 wdot = Vec2{vc.x, vc.y} + vc.theta * perp(rc) - Vec2{vp.x, vp.y};
      qdot[node.coordinate] = dot(j.axis, rotate(-pp.theta, wdot - vp.theta * perp(w)));
    }
  }
}

void Multibody::kinematics(const Vector& q, const Vector& qdot,
                           std::vector<BodyKinematics>& out) const {
  out.resize(nodes_.size());
  for (int b : order_) {
    const Node& node = nodes_[b];
    BodyKinematics& k = out[b];
    const int c = node.coordinate;
    k.jac_origin = Jacobian2::Zero(2, dof_);
    k.jac_theta = RowVector::Zero(dof_);
    if (node.joint < 0) {
      k.pose = {q[c], q[c + 1], q[c + 2]};
      k.velocity = {qdot[c], qdot[c + 1]};
      k.omega = qdot[c + 2];
      k.jac_origin(0, c) = 1.0;
      k.jac_origin(1, c + 1) = 1.0;
      k.jac_theta[c + 2] = 1.0;
      k.bias_accel = {};
      k.bias_alpha = 0.0;
      continue;
    }
    BodyKinematics world;
    const BodyKinematics* p = &world;
    if (node.parent >= 0) {
      p = &out[node.parent];
    } else {
      world.jac_origin = Jacobian2::Zero(2, dof_);
      world.jac_theta = RowVector::Zero(dof_);
    }
    const Joint& j = joints_[node.joint];
    const double qi = q[c], qd = qdot[c];
    Vec2 anchor, anchor_vel, anchor_bias;
    Jacobian2 anchor_jac;
    if (j.kind == JointKind::kRevolute) {
      Vec2 rp = rotate(p->pose.theta, j.anchor_parent);
      anchor = p->pose.position() + rp;
      anchor_jac = p->jac_origin + col(perp(rp)) * p->jac_theta;
      anchor_vel = p->velocity + p->omega * perp(rp);
      anchor_bias = p->bias_accel + p->bias_alpha * perp(rp) - p->omega * p->omega * rp;
      k.pose.theta = p->pose.theta + qi;
      k.omega = p->omega + qd;
      k.jac_theta = p->jac_theta;
      k.jac_theta[c] += 1.0;
    } else {
      Vec2 uw = rotate(p->pose.theta, j.axis);
      Vec2 d = rotate(p->pose.theta, j.anchor_parent + qi * j.axis);
      anchor = p->pose.position() + d;
      anchor_jac = p->jac_origin + col(perp(d)) * p->jac_theta;
      anchor_jac.col(c) += col(uw);
      anchor_vel = p->velocity + p->omega * perp(d) + qd * uw;
      anchor_bias = p->bias_accel + p->bias_alpha * perp(d) - p->omega * p->omega * d +
                    2.0 * p->omega * qd * perp(uw);
      k.pose.theta = p->pose.theta;
      k.omega = p->omega;
      k.jac_theta = p->jac_theta;
    }
    k.bias_alpha = p->bias_alpha;
    Vec2 rc = rotate(k.pose.theta, j.anchor_child);
    Vec2 origin = anchor - rc;
    k.pose.x = origin.x;
    k.pose.y = origin.y;
    k.jac_origin = anchor_jac - col(perp(rc)) * k.jac_theta;
    k.velocity = anchor_vel - k.omega * perp(rc);
    k.bias_accel = anchor_bias - k.bias_alpha * perp(rc) + k.omega * k.omega * rc;
  }
}

void Multibody::poses(const Vector& q, std::vector<Pose2>& out) const {
  out.resize(nodes_.size());
  for (int b : order_) {
    const Node& node = nodes_[b];
    const int c = node.coordinate;
    if (node.joint < 0) {
      out[b] = {q[c], q[c + 1], q[c + 2]};
      continue;
    }
    Pose2 p = node.parent >= 0 ? out[node.parent] : Pose2{};
    const Joint& j = joints_[node.joint];
    Vec2 anchor;
    double theta;
    if (j.kind == JointKind::kRevolute) {
      anchor = p.to_world(j.anchor_parent);
      theta = p.theta + q[c];
    } else {
      anchor = p.to_world(j.anchor_parent + q[c] * j.axis);
      theta = p.theta;
    }
    Vec2 origin = anchor - rotate(theta, j.anchor_child);
    out[b] = {origin.x, origin.y, theta};
  }
}

Dynamics Multibody::dynamics(const Vector& q, const Vector& qdot) const {
  std::vector<BodyKinematics> kin;
  kinematics(q, qdot, kin);
  Dynamics d;
  d.mass = Matrix::Zero(dof_, dof_);
  d.bias = Vector::Zero(dof_);
  d.gravity = Vector::Zero(dof_);
  for (size_t b = 0; b < nodes_.size(); ++b) {
    const Node& node = nodes_[b];
    const BodyKinematics& k = kin[b];
    Vec2 rc = rotate(k.pose.theta, node.com);
    Jacobian2 jc = k.jac_origin + col(perp(rc)) * k.jac_theta;
    Vec2 bias = k.bias_accel + k.bias_alpha * perp(rc) - k.omega * k.omega * rc;
    d.mass.noalias() += node.mass * jc.transpose() * jc;
    d.mass.noalias() += node.inertia * k.jac_theta.transpose() * k.jac_theta;
    d.bias.noalias() += node.mass * jc.transpose() * col(bias);
    d.bias.noalias() += node.inertia * k.bias_alpha * k.jac_theta.transpose();
    d.gravity.noalias() += node.mass * jc.transpose() * col(gravity_);
  }
  return d;
}

Jacobian2 Multibody::point_jacobian(const std::vector<BodyKinematics>& kin, int body,
                                    Vec2 point) const {
  const BodyKinematics& k = kin[body];
  return k.jac_origin + col(perp(point - k.pose.position())) * k.jac_theta;
}

double Multibody::kinetic_energy(const Vector& q, const Vector& qdot) const {
  std::vector<BodyKinematics> kin;
  kinematics(q, qdot, kin);
  double ke = 0.0;
  for (size_t b = 0; b < nodes_.size(); ++b) {
    const BodyKinematics& k = kin[b];
    Vec2 v = k.velocity + k.omega * perp(rotate(k.pose.theta, nodes_[b].com));
    ke += 0.5 * nodes_[b].mass * dot(v, v) + 0.5 * nodes_[b].inertia * k.omega * k.omega;
  }
  return ke;
}

double Multibody::potential_energy(const Vector& q) const {
  std::vector<Pose2> p;
  poses(q, p);
  double pe = 0.0;
  for (size_t b = 0; b < nodes_.size(); ++b) {
    pe -= nodes_[b].mass * dot(gravity_, p[b].to_world(nodes_[b].com));
  }
  return pe;
}

}  // namespace partrace
