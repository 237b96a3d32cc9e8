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

#include "partrace/scenarios.h"

#include <algorithm>
#include <sstream>

#include "partrace/harness.h"
#include "partrace/param_path.h"

namespace partrace {
namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double upright_time(const Outcome& o, double duration) {
  return o.kind == Outcome::Kind::kFall ? o.t : duration;
}

void check_axis(const ScenarioSpec& spec, const SweepAxis& axis) {
  ScenarioSpec scratch = spec;
  ParamRef ref = resolve_path(scratch, axis.path);
  if (ref.is_channel()) {
    throw ScenarioError(ScenarioError::Kind::kValidation, axis.path,
                        "sweep axes must be model parameters, not noise channels");
  }
}

}  // namespace

std::string path_unit(const std::string& path) {
  if (ends_with(path, ".mass")) return "kg";
  if (ends_with(path, ".inertia")) return "kg*m^2";
  if (path.find("velocity") != std::string::npos) {
    return ends_with(path, ".theta") ? "rad/s" : "m/s";
  }
  if (ends_with(path, ".theta") || ends_with(path, ".phase")) return "rad";
  if (ends_with(path, ".friction") || ends_with(path, ".restitution")) return "1";
  if (path == "duration" || path == "timestep" || path == "control.lag") return "s";
  if (path.rfind("controller.", 0) == 0) return "-";
  return "m";
}

SweepResult stability_sweep_grid(const ScenarioSpec& spec, const SweepAxis& a,
                                 const SweepAxis& b, int n, int workers,
                                 const RunOptions& options) {
  check_axis(spec, a);
  check_axis(spec, b);
  SweepResult r;
  r.axis_a = a;
  r.axis_b = b;
  r.grid = n;
  r.duration = spec.duration;
  r.points.resize(static_cast<size_t>(n) * n);
  parallel_for(n * n, workers, [&](int k) {
    const int i = k / n, j = k % n;
    SweepPoint& p = r.points[k];
    p.index = k;
    p.a = a.lo + (i + 0.5) * (a.hi - a.lo) / n;
    p.b = b.lo + (j + 0.5) * (b.hi - b.lo) / n;
    ScenarioSpec s = spec;
    resolve_path(s, a.path).write(p.a);
    resolve_path(s, b.path).write(p.b);
    try {
      validate_scenario(s);
      p.outcome = simulate_trace(s, unperturbed_particle(s, 0), options).outcome;
    } catch (const ScenarioError& e) {
      p.outcome = Outcome::invalid(e.what(), 0.0);
    }
    p.upright_time = upright_time(p.outcome, spec.duration);
  });
  return r;
}

SweepResult stability_sweep_mc(const ScenarioSpec& spec, const SweepAxis& a, const SweepAxis& b,
                               int samples, uint64_t master_seed, int workers,
                               const RunOptions& options) {
  check_axis(spec, a);
  check_axis(spec, b);
  SweepResult r;
  r.axis_a = a;
  r.axis_b = b;
  r.duration = spec.duration;
  const std::vector<Particle> particles = make_particles(spec, samples, master_seed);
  r.points.resize(particles.size());
  auto controller = make_controller(spec);
  parallel_for(static_cast<int>(particles.size()), workers, [&](int k) {
    const Particle& particle = particles[k];
    SweepPoint& p = r.points[k];
    p.index = particle.index;
    ScenarioSpec truth = apply_offsets(spec, particle);
    p.a = read_path(truth, a.path);
    p.b = read_path(truth, b.path);
    p.outcome = simulate_trace(spec, particle, *controller, options).outcome;
    p.upright_time = upright_time(p.outcome, spec.duration);
  });
  return r;
}

std::string sweep_text(const SweepResult& result, const FileHeader& header) {
  std::ostringstream out;
  out << "# partrace sweep\n";
  out << "# tool_version: " << header.tool_version << "\n";
  out << "# master_seed: " << header.master_seed << "\n";
  out << "# scenario: " << header.scenario_name << "\n";
  out << "# scenario_sha256: " << header.scenario_digest << "\n";
  out << "# mode: " << (result.grid > 0 ? "grid " + std::to_string(result.grid) : "monte_carlo")
      << "\n";
  out << "# axis_a: " << result.axis_a.path << " [" << path_unit(result.axis_a.path) << "] "
      << format_double(result.axis_a.lo) << " " << format_double(result.axis_a.hi) << "\n";
  out << "# axis_b: " << result.axis_b.path << " [" << path_unit(result.axis_b.path) << "] "
      << format_double(result.axis_b.lo) << " " << format_double(result.axis_b.hi) << "\n";
  out << "# duration: " << format_double(result.duration) << "\n";
  out << "# columns: index\t" << result.axis_a.path << "\t" << result.axis_b.path
      << "\tupright_time\toutcome\toutcome_t\n";
  out << "# units: -\t" << path_unit(result.axis_a.path) << "\t" << path_unit(result.axis_b.path)
      << "\ts\t-\ts\n";
  for (const SweepPoint& p : result.points) {
    out << p.index << "\t" << format_double(p.a) << "\t" << format_double(p.b) << "\t"
        << format_double(p.upright_time) << "\t" << outcome_label(p.outcome.kind) << "\t"
        << format_double(p.outcome.t) << "\n";
  }
  out << "# end: " << result.points.size() << "\n";
  return out.str();
}

std::vector<PolicyResult> policy_compare(const ScenarioSpec& spec,
                                         const std::vector<double>& values, int particles,
                                         uint64_t master_seed, int workers,
                                         const std::string& path, const RunOptions& options) {
  std::vector<PolicyResult> results;
  for (double v : values) {
    ScenarioSpec s = spec;
    resolve_path(s, path).write(v);
    validate_scenario(s);
    PolicyResult r;
    r.value = v;
    r.traces = run_particles(s, particles, master_seed, workers, options);
    r.outcomes = outcome_partition(r.traces, s.duration);
    r.clustering = cluster_traces(r.traces);
    if (r.outcomes.valid >= 2) r.novel = novel_events(r.traces);
    results.push_back(std::move(r));
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const PolicyResult& x, const PolicyResult& y) {
                     return (x.clustering.clusters.size() <= 1) > (y.clustering.clusters.size() <= 1);
                   });
  return results;
}

}  // namespace partrace
