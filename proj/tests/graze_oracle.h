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

// Purely geometric graze height for the curb stepper: the smallest step
// height at which the commanded lead-foot disc path keeps a non-negative
// clearance from the curb box. Shares no code with the simulator or the
// controller; only plain numbers are read from the scenario.

#ifndef PARTRACE_TESTS_GRAZE_ORACLE_H_
#define PARTRACE_TESTS_GRAZE_ORACLE_H_

#include <algorithm>
#include <cmath>

namespace partrace::testing {

struct GrazeGeometry {
  double radius = 0.02;       // foot disc
  double press = 0.005;       // stance depth below the ground
  double margin = 0.2;        // vertical-only fraction at each swing end
  double x0 = 0.0;
  double dx = 0.32;
  double box[4] = {0.155, 0.0, 0.165, 0.03};  // min x, min y, max x, max y
};

inline double quintic(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (6.0 * u * u - 15.0 * u + 10.0);
}

// Foot centre at swing phase s in [0, 1] for step height h.
inline void foot_centre(const GrazeGeometry& g, double h, double s, double& x, double& y) {
  const double low = g.radius - g.press, high = g.radius + h;
  x = g.x0 + g.dx * quintic((s - g.margin) / (1.0 - 2.0 * g.margin));
  y = s < 0.5 ? low + (high - low) * quintic(2.0 * s) : high + (low - high) * quintic(2.0 * s - 1.0);
}

inline double clearance(const GrazeGeometry& g, double h, int samples = 40000) {
  double best = INFINITY;
  for (int i = 0; i <= samples; ++i) {
    double x, y;
    foot_centre(g, h, static_cast<double>(i) / samples, x, y);
    const double cx = std::clamp(x, g.box[0], g.box[2]);
    const double cy = std::clamp(y, g.box[1], g.box[3]);
    best = std::min(best, std::hypot(x - cx, y - cy) - g.radius);
  }
  return best;
}

inline double graze_height(const GrazeGeometry& g, double lo = 0.0, double hi = 0.1) {
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (clearance(g, mid) >= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace partrace::testing

#endif  // PARTRACE_TESTS_GRAZE_ORACLE_H_
