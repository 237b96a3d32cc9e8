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

// Command implementations behind the partrace tool. Each returns the
// process exit code; see kExit* below.

#ifndef PARTRACE_HARNESS_H_
#define PARTRACE_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "partrace/diverge.h"
#include "partrace/scenarios.h"
#include "partrace/trace_runner.h"

namespace partrace {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDivergence = 10;
inline constexpr int kExitNoBracket = 11;

// Runs fn(i) for every i in [0, n) on `workers` threads. Jobs are handed
// out in index order; the first exception thrown by a job is rethrown after
// all workers stop.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// std::thread::hardware_concurrency(), at least 1.
int default_workers();

struct ScenarioSource {
  std::filesystem::path path;
  std::string bytes;
  std::string digest;  // SHA-256 hex of bytes
  ScenarioSpec spec;
};

// `name_or_path` is a file path, or the name of a bundled scenario.
// Throws ScenarioError or std::runtime_error.
ScenarioSource load_source(const std::string& name_or_path);

FileHeader file_header(const ScenarioSource& source, uint64_t master_seed);

// In-memory particle run; traces are returned in particle order.
std::vector<Trace> run_particles(const ScenarioSpec& spec, int particles, uint64_t master_seed,
                                 int workers, const RunOptions& options = {});

struct RunConfig {
  std::string scenario;
  int particles = 1;
  uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out;
  bool allow_invalid = false;
};

struct AnalyzeConfig {
  std::filesystem::path run_dir;
  double window = kDefaultNoveltyWindow;
  double support = kDefaultSupport;
  int link_threshold = kDefaultLinkThreshold;
};

struct SweepConfig {
  std::string scenario;
  std::vector<SweepAxis> axes;  // exactly two
  int grid = 0;                 // n for an n x n lattice, or
  int monte_carlo = 0;          // number of samples
  uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out;
};

struct BisectConfig {
  std::string scenario;
  std::string path;
  double lo = 0.0;
  double hi = 0.0;
  double tol = 1e-4;
  std::filesystem::path out;  // optional
};

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepConfig& config, std::ostream& out, std::ostream& err);
int cmd_bisect(const BisectConfig& config, std::ostream& out, std::ostream& err);

// File names inside a run directory.
inline constexpr const char* kManifestFile = "manifest.tsv";
inline constexpr const char* kTimingFile = "timing.tsv";
inline constexpr const char* kScenarioCopy = "scenario.json";

}  // namespace partrace

#endif  // PARTRACE_HARNESS_H_
