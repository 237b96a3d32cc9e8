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

#include "partrace/contact_solver.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace partrace {
namespace {

constexpr int kMaxEnumeratedContacts = 6;

struct Local {
  double n = 0.0;
  double t = 0.0;
};

// Exact solution of the single-contact problem given the other contacts'
// impulses: separate, stick, then slide in either direction.
Local solve_local(double a, double b, double c, double d, double cn, double ct, double mu,
                  double target) {
  if (cn >= target) return {};
  if (mu == 0.0) return {a > 0.0 ? (target - cn) / a : 0.0, 0.0};
  const double det = a * d - b * c;
  if (det > 0.0) {
    double ln = ((target - cn) * d + b * ct) / det;
    double lt = (-a * ct - c * (target - cn)) / det;
    if (ln >= 0.0 && std::abs(lt) <= mu * ln * (1.0 + 1e-12)) return {ln, lt};
  }
  for (double s : {1.0, -1.0}) {
    double denom = a - s * mu * b;
    if (denom <= 0.0) continue;
    double ln = (target - cn) / denom;
    if (ln < 0.0) continue;
    double lt = -s * mu * ln;
    double wt = ct + c * ln + d * lt;
    if (s * wt >= 0.0) return {ln, lt};
  }
  double ln = a > 0.0 ? std::max(0.0, (target - cn) / a) : 0.0;
  double lt = d > 0.0 ? std::clamp(-ct / d, -mu * ln, mu * ln) : 0.0;
  return {ln, lt};
}

ContactMode classify(double ln, double lt, double wt, double mu) {
  if (ln <= 0.0) return ContactMode::kSeparating;
  if (mu == 0.0 || std::abs(lt) < mu * ln * (1.0 - 1e-9)) return ContactMode::kSticking;
  double s = wt != 0.0 ? wt : -lt;
  return s > 0.0 ? ContactMode::kSlidingPositive : ContactMode::kSlidingNegative;
}

// Solves the linear system implied by a mode pattern.
Vector polish(const Matrix& W, const Vector& c, const std::vector<double>& mu,
              const std::vector<double>& target, const std::vector<ContactMode>& modes) {
  const int m = static_cast<int>(modes.size());
  Matrix A = Matrix::Zero(2 * m, 2 * m);
  Vector r = Vector::Zero(2 * m);
  for (int i = 0; i < m; ++i) {
    const int n = 2 * i, t = 2 * i + 1;
    if (modes[i] == ContactMode::kSeparating) {
      A(n, n) = 1.0;
      A(t, t) = 1.0;
      continue;
    }
    A.row(n) = W.row(n);
    r[n] = target[i] - c[n];
    if (mu[i] == 0.0) {
      A(t, t) = 1.0;
    } else if (modes[i] == ContactMode::kSticking) {
      A.row(t) = W.row(t);
      r[t] = -c[t];
    } else {
      double s = modes[i] == ContactMode::kSlidingPositive ? 1.0 : -1.0;
      A(t, t) = 1.0;
      A(t, n) = s * mu[i];
    }
  }
  return A.completeOrthogonalDecomposition().solve(r);
}

}  // namespace

double complementarity_residual(const Matrix& W, const Vector& c, const std::vector<double>& mu,
                                const std::vector<double>& target, const Vector& lambda) {
  const Vector w = W * lambda + c;
  double worst = 0.0;
  for (size_t i = 0; i < mu.size(); ++i) {
    const double ln = lambda[2 * i], lt = lambda[2 * i + 1];
    const double wn = w[2 * i] - target[i], wt = w[2 * i + 1];
    worst = std::max({worst, -ln, -wn, std::abs(ln * wn)});
    if (mu[i] == 0.0) {
      worst = std::max(worst, std::abs(lt));
    } else {
      const double slack = mu[i] * ln - std::abs(lt);
      worst = std::max({worst, -slack, std::abs(wt) * std::max(0.0, slack), lt * wt});
    }
  }
  return worst;
}

ContactSolution solve_contact(const Matrix& mass, double h, const std::vector<ContactRow>& rows,
                              const Vector& qdot, const Vector& force,
                              const SolverSettings& settings) {
  const int m = static_cast<int>(rows.size());
  const int dof = static_cast<int>(qdot.size());
  Eigen::LLT<Matrix> llt(mass);
  Vector vstar = qdot + h * llt.solve(force);

  ContactSolution out;
  if (m == 0) {
    out.qdot = vstar;
    return out;
  }
  Matrix J = Matrix::Zero(2 * m, dof);
  std::vector<double> mu(m), target(m);
  for (int i = 0; i < m; ++i) {
    J.row(2 * i) = rows[i].jn;
    mu[i] = rows[i].mu;
    target[i] = rows[i].target;
    if (mu[i] > 0.0) J.row(2 * i + 1) = rows[i].jt;
  }
  const Matrix minv_jt = llt.solve(J.transpose());
  const Matrix W = J * minv_jt;
  const Vector c = J * vstar;

  Vector lambda = Vector::Zero(2 * m);
  Vector best = lambda;
  double best_residual = complementarity_residual(W, c, mu, target, lambda);
  int iter = 0;
  while (best_residual > settings.tolerance && iter < settings.max_iterations) {
    ++iter;
    for (int i = 0; i < m; ++i) {
      const int n = 2 * i, t = 2 * i + 1;
      double cn = c[n] + W.row(n).dot(lambda) - W(n, n) * lambda[n] - W(n, t) * lambda[t];
      double ct = c[t] + W.row(t).dot(lambda) - W(t, n) * lambda[n] - W(t, t) * lambda[t];
      Local l = solve_local(W(n, n), W(n, t), W(t, n), W(t, t), cn, ct, mu[i], target[i]);
      lambda[n] = l.n;
      lambda[t] = l.t;
    }
    double r = complementarity_residual(W, c, mu, target, lambda);
    if (r < best_residual) {
      best_residual = r;
      best = lambda;
    }
    if (best_residual <= settings.tolerance) break;
    const Vector w = W * lambda + c;
    std::vector<ContactMode> modes(m);
    for (int i = 0; i < m; ++i) {
      modes[i] = classify(lambda[2 * i], lambda[2 * i + 1], w[2 * i + 1], mu[i]);
    }
    Vector p = polish(W, c, mu, target, modes);
    double rp = complementarity_residual(W, c, mu, target, p);
    if (rp < best_residual) {
      best_residual = rp;
      best = p;
    }
  }
  if (best_residual > settings.tolerance && m <= kMaxEnumeratedContacts) {
    // Gauss-Seidel can cycle; small problems fall back to trying every mode
    // pattern.
    int patterns = 1;
    for (int i = 0; i < m; ++i) patterns *= 4;
    std::vector<ContactMode> modes(m);
    for (int code = 0; code < patterns && best_residual > settings.tolerance; ++code) {
      for (int i = 0, q = code; i < m; ++i, q /= 4) modes[i] = static_cast<ContactMode>(q % 4);
      Vector p = polish(W, c, mu, target, modes);
      double rp = complementarity_residual(W, c, mu, target, p);
      if (rp < best_residual) {
        best_residual = rp;
        best = p;
      }
    }
  }
  if (best_residual > settings.tolerance) {
    std::ostringstream msg;
    msg << "contact solver did not converge in " << iter << " iterations (residual "
        << best_residual << ", " << m << " contacts)";
    throw SolverError(msg.str(), best_residual);
  }

  out.qdot = vstar + minv_jt * best;
  out.residual = best_residual;
  out.iterations = iter;
  const Vector w = J * out.qdot;
  for (int i = 0; i < m; ++i) {
    out.lambda_n.push_back(best[2 * i]);
    out.lambda_t.push_back(best[2 * i + 1]);
    out.normal_velocity.push_back(w[2 * i]);
    double wt = mu[i] > 0.0 ? w[2 * i + 1] : rows[i].jt.size() == dof ? rows[i].jt.dot(out.qdot) : 0.0;
    out.tangential_velocity.push_back(wt);
    out.modes.push_back(classify(best[2 * i], best[2 * i + 1], wt, mu[i]));
  }
  return out;
}

ContactSolution resolve_impact(const Matrix& mass, std::vector<ContactRow> rows,
                               const std::vector<double>& restitution, const Vector& qdot,
                               const SolverSettings& settings) {
  for (size_t i = 0; i < rows.size(); ++i) {
    if (restitution[i] < 0.0) continue;
    double vn = rows[i].jn.dot(qdot);
    rows[i].target = vn < 0.0 ? -restitution[i] * vn : 0.0;
  }
  return solve_contact(mass, 0.0, rows, qdot, Vector::Zero(qdot.size()), settings);
}

}  // namespace partrace
