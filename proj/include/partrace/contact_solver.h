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

// Velocity-level frictional contact with exact planar Coulomb cones.
//
// For contact i with normal/tangent rows (Jn_i, Jt_i), post-step velocity
//   v+ = v* + M^-1 (Jn^T lambda_n + Jt^T lambda_t)
// must satisfy
//   0 <= lambda_n  _|_  Jn v+ - b >= 0
//   |lambda_t| <= mu lambda_n,  Jt v+ = 0 unless |lambda_t| = mu lambda_n,
//   in which case lambda_t opposes Jt v+.
// Solved by block Gauss-Seidel with an exact 2x2 local solve per contact,
// then polished by solving the linear system of the mode pattern GS found.
// When that stalls on a problem with at most six contacts, every mode
// pattern is tried.

#ifndef PARTRACE_CONTACT_SOLVER_H_
#define PARTRACE_CONTACT_SOLVER_H_

#include <stdexcept>
#include <vector>

#include "partrace/multibody.h"

namespace partrace {

enum class ContactMode { kSticking, kSlidingPositive, kSlidingNegative, kSeparating };

struct ContactRow {
  RowVector jn;
  RowVector jt;       // ignored when mu == 0
  double mu = 0.0;
  double target = 0.0;  // b: lower bound on the post-step normal velocity
};

struct SolverSettings {
  double tolerance = 1e-10;
  int max_iterations = 200;
};

struct ContactSolution {
  Vector qdot;  // post-step velocity
  std::vector<double> lambda_n;
  std::vector<double> lambda_t;
  std::vector<double> normal_velocity;      // Jn v+
  std::vector<double> tangential_velocity;  // Jt v+
  std::vector<ContactMode> modes;
  double residual = 0.0;
  int iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& message, double residual)
      : std::runtime_error(message), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Steps qdot over h under generalized force `force` with the given contact
// rows active. Throws SolverError when the residual stays above tolerance.
ContactSolution solve_contact(const Matrix& mass, double h, const std::vector<ContactRow>& rows,
                              const Vector& qdot, const Vector& force,
                              const SolverSettings& settings = {});

// Newton impact: rows flagged in `restitution` >= 0 use target -e * (Jn v-)
// (approaching contacts); rows with restitution < 0 keep their given target.
ContactSolution resolve_impact(const Matrix& mass, std::vector<ContactRow> rows,
                               const std::vector<double>& restitution, const Vector& qdot,
                               const SolverSettings& settings = {});

// Complementarity residual of impulses (lambda) for Delassus operator W and
// free contact velocity c (both in [n0, t0, n1, t1, ...] order).
double complementarity_residual(const Matrix& W, const Vector& c, const std::vector<double>& mu,
                                const std::vector<double>& target, const Vector& lambda);

}  // namespace partrace

#endif  // PARTRACE_CONTACT_SOLVER_H_
