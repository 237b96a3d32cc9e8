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

// partrace: run particle traces, analyze them, sweep and bisect parameters.
//
// Exit codes: 0 clean, 10 divergence flagged (analyze), 11 no bracket
// (bisect), 1 any other error.

#include <iostream>

#include "CLI11.hpp"
#include "partrace/harness.h"

int main(int argc, char** argv) {
  using namespace partrace;
  CLI::App app{"Monte Carlo particle traces for planar nonsmooth rigid-body scenarios"};
  app.set_version_flag("--version", PARTRACE_VERSION);
  app.require_subcommand(1);

  RunConfig run;
  run.workers = default_workers();
  auto* run_cmd = app.add_subcommand("run", "trace s perturbed particles of a scenario");
  run_cmd->add_option("--scenario", run.scenario, "scenario file or bundled scenario name")
      ->required();
  run_cmd->add_option("--particles", run.particles, "number of particles s")->default_val(1);
  run_cmd->add_option("--seed", run.seed, "master seed")->default_val(0);
  run_cmd->add_option("--workers", run.workers, "worker threads c")->capture_default_str();
  run_cmd->add_option("--out", run.out, "output directory")->required();
  run_cmd->add_flag("--allow-invalid", run.allow_invalid, "exit 0 even if some traces are invalid");

  AnalyzeConfig analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "divergence report over a run directory");
  analyze_cmd->add_option("run_dir", analyze.run_dir, "directory written by 'run'")->required();
  analyze_cmd->add_option("--window", analyze.window, "novelty time window (s)")
      ->capture_default_str();
  analyze_cmd->add_option("--support", analyze.support, "novelty support threshold")
      ->capture_default_str();
  analyze_cmd->add_option("--link-threshold", analyze.link_threshold,
                          "single-linkage edit distance threshold")
      ->capture_default_str();

  SweepConfig sweep;
  sweep.workers = default_workers();
  std::vector<std::string> sweep_axes;
  std::vector<double> sweep_lo, sweep_hi;
  auto* sweep_cmd = app.add_subcommand("sweep", "upright-time surface over two parameters");
  sweep_cmd->add_option("--scenario", sweep.scenario, "scenario file or bundled name")->required();
  sweep_cmd->add_option("--axis", sweep_axes, "parameter path (give twice)")->expected(2)->required();
  sweep_cmd->add_option("--lo", sweep_lo, "lower bound per axis")->expected(2)->required();
  sweep_cmd->add_option("--hi", sweep_hi, "upper bound per axis")->expected(2)->required();
  auto* grid_opt = sweep_cmd->add_option("--grid", sweep.grid, "n for an n x n lattice");
  auto* mc_opt = sweep_cmd->add_option("--mc", sweep.monte_carlo, "Monte Carlo sample count");
  grid_opt->excludes(mc_opt);
  sweep_cmd->add_option("--seed", sweep.seed, "master seed (Monte Carlo)")->default_val(0);
  sweep_cmd->add_option("--workers", sweep.workers, "worker threads")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "output directory (default: stdout)");

  BisectConfig bisect;
  auto* bisect_cmd = app.add_subcommand("bisect", "localize an outcome flip along one parameter");
  bisect_cmd->add_option("--scenario", bisect.scenario, "scenario file or bundled name")
      ->required();
  bisect_cmd->add_option("--axis", bisect.path, "parameter path")->required();
  bisect_cmd->add_option("--lo", bisect.lo, "lower end")->required();
  bisect_cmd->add_option("--hi", bisect.hi, "upper end")->required();
  bisect_cmd->add_option("--tol", bisect.tol, "target interval width")->capture_default_str();
  bisect_cmd->add_option("--out", bisect.out, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
  if (*analyze_cmd) return cmd_analyze(analyze, std::cout, std::cerr);
  if (*sweep_cmd) {
    for (int i = 0; i < 2; ++i) sweep.axes.push_back({sweep_axes[i], sweep_lo[i], sweep_hi[i]});
    return cmd_sweep(sweep, std::cout, std::cerr);
  }
  if (*bisect_cmd) return cmd_bisect(bisect, std::cout, std::cerr);
  return kExitError;
}
