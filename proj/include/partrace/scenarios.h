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

// Experiment drivers for the bundled scenarios: parameter-plane stability
// sweeps and step-policy comparison.

#ifndef PARTRACE_SCENARIOS_H_
#define PARTRACE_SCENARIOS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "partrace/diverge.h"
#include "partrace/trace.h"
#include "partrace/trace_runner.h"

namespace partrace {

inline constexpr const char* kBundledScenarios[] = {"bouncing_disc", "incline_block",
                                                    "rimless_wheel", "curb_stepper"};

struct SweepAxis {
  std::string path;
  double lo = 0.0;
  double hi = 0.0;
};

struct SweepPoint {
  int index = 0;  // lattice index (row-major, first axis slowest) or particle index
  double a = 0.0;
  double b = 0.0;
  double upright_time = 0.0;  // outcome time for falls, else the duration
  Outcome outcome;
};

struct SweepResult {
  SweepAxis axis_a;
  SweepAxis axis_b;
  int grid = 0;  // lattice size, 0 for Monte Carlo
  double duration = 0.0;
  std::vector<SweepPoint> points;
};

// Unit of a parameter path ("kg", "m", "rad", ...), for file headers.
std::string path_unit(const std::string& path);

// Lattice sweep at cell centres, lo + (i + 1/2)(hi - lo)/n, every noise
// source off. Throws ScenarioError when an axis does not resolve.
SweepResult stability_sweep_grid(const ScenarioSpec& spec, const SweepAxis& a,
                                 const SweepAxis& b, int n, int workers,
                                 const RunOptions& options = {});

// Monte Carlo sweep: samples particles from every declared distribution and
// reports each one at its perturbed axis values.
SweepResult stability_sweep_mc(const ScenarioSpec& spec, const SweepAxis& a, const SweepAxis& b,
                               int samples, uint64_t master_seed, int workers,
                               const RunOptions& options = {});

// Delimited text with header rows naming both axes and their units.
std::string sweep_text(const SweepResult& result, const FileHeader& header);

struct PolicyResult {
  double value = 0.0;  // the policy parameter
  OutcomeStats outcomes;
  Clustering clustering;
  std::vector<NovelEvent> novel;
  std::vector<Trace> traces;
};

// Runs `particles` perturbed traces per policy value written to `path`
// (default: the stepper's step height). Results come back ordered by
// predictability: single-cluster policies first, then by input order.
std::vector<PolicyResult> policy_compare(const ScenarioSpec& spec,
                                         const std::vector<double>& values, int particles,
                                         uint64_t master_seed, int workers,
                                         const std::string& path = "controller.step_height",
                                         const RunOptions& options = {});

}  // namespace partrace

#endif  // PARTRACE_SCENARIOS_H_
