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

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "partrace/digest.h"
#include "partrace/harness.h"
#include "test_util.h"

namespace partrace {
namespace {

namespace fs = std::filesystem;

int cli(const std::string& args) {
  const std::string cmd = std::string(PARTRACE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string scenario_file(const std::string& name) {
  return bundled_scenario_path(name).string();
}

TEST(ExitCodes, RunAnalyzeBisect) {
  testing::TempDir dir("exit");
  const std::string one = (dir.path() / "one").string();
  const std::string many = (dir.path() / "many").string();
  EXPECT_EQ(cli("run --scenario bouncing_disc --particles 1 --out " + one), kExitOk);
  EXPECT_EQ(cli("analyze " + one), kExitOk);
  EXPECT_EQ(cli("run --scenario " + scenario_file("curb_stepper") +
                " --particles 12 --workers 2 --out " + many),
            kExitOk);
  // The bundled stepper sits at the graze height: strikes and clears mix.
  EXPECT_EQ(cli("analyze " + many), kExitDivergence);
  EXPECT_TRUE(fs::exists(fs::path(many) / "report.txt"));
  EXPECT_TRUE(fs::exists(fs::path(many) / "summary.json"));
  EXPECT_TRUE(fs::exists(fs::path(many) / "clusters.tsv"));
  EXPECT_TRUE(fs::exists(fs::path(many) / "fall_histogram.tsv"));
  EXPECT_EQ(cli("bisect --scenario curb_stepper --axis controller.step_height --lo 0.02 --hi 0.04 "
                "--tol 1e-3"),
            kExitOk);
  EXPECT_EQ(cli("bisect --scenario curb_stepper --axis controller.step_height --lo 0.04 --hi 0.05 "
                "--tol 1e-3"),
            kExitNoBracket);
}

TEST(ExitCodes, ErrorsExitOne) {
  testing::TempDir dir("err");
  const fs::path bad = dir.path() / "bad.json";
  write_file(bad, "{\"name\": \"x\", \"bodies\": [");
  EXPECT_EQ(cli("run --scenario " + bad.string() + " --out " + (dir.path() / "o").string()),
            kExitError);
  EXPECT_EQ(cli("run --scenario no_such_scenario --out " + (dir.path() / "o").string()),
            kExitError);
  EXPECT_EQ(cli("analyze " + (dir.path() / "missing").string()), kExitError);
  EXPECT_EQ(cli("run --particles 3"), kExitError);
  EXPECT_EQ(cli("frobnicate"), kExitError);
  EXPECT_EQ(cli("bisect --scenario curb_stepper --axis body.nope.mass --lo 0 --hi 1"), kExitError);
  EXPECT_EQ(cli("sweep --scenario rimless_wheel --axis sensor.q.wheel.theta body.wheel.mass "
                "--lo 0 0.1 --hi 1 1 --grid 2"),
            kExitError);
  EXPECT_EQ(cli("--version"), kExitOk);
}

std::map<std::string, std::string> digests(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == kTimingFile) continue;  // wall times differ by design
    out[name] = sha256_hex(read_file(entry.path()));
  }
  return out;
}

TEST(Determinism, WorkerCountDoesNotChangeAnyFile) {
  testing::TempDir dir("det");
  std::map<std::string, std::string> first;
  for (int workers : {1, 2, 8}) {
    RunConfig config;
    config.scenario = "curb_stepper";
    config.particles = 10;
    config.seed = 99;
    config.workers = workers;
    config.out = dir.path() / ("c" + std::to_string(workers));
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(config, out, err), kExitOk) << err.str();
    auto d = digests(config.out);
    EXPECT_EQ(d.size(), 2u * 10u + 2u);
    if (first.empty()) {
      first = d;
    } else {
      EXPECT_EQ(d, first) << "workers " << workers;
    }
  }
}

TEST(Determinism, DifferentSeedsGiveDifferentTraces) {
  ScenarioSpec s = testing::bundled("bouncing_disc");
  auto a = run_particles(s, 3, 1, 1);
  auto b = run_particles(s, 3, 2, 1);
  // Particle 0 is always the unperturbed one; only its seed differs.
  EXPECT_NE(a[0].seed, b[0].seed);
  EXPECT_EQ(a[0].telemetry, b[0].telemetry);
  EXPECT_EQ(a[0].events, b[0].events);
  EXPECT_FALSE(same_record(a[1], b[1]));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (int workers : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, workers, [&](int i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, RethrowsTheFirstFailure) {
  EXPECT_THROW(parallel_for(20, 4,
                            [](int i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Run, ManifestDigestsMatchFiles) {
  testing::TempDir dir("manifest");
  RunConfig config;
  config.scenario = "incline_block";
  config.particles = 4;
  config.out = dir.path();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(config, out, err), kExitOk);
  const std::string manifest = read_file(dir.path() / kManifestFile);
  for (int i = 0; i < 4; ++i) {
    const std::string tel = sha256_hex(read_file(telemetry_path(dir.path(), i)));
    const std::string ev = sha256_hex(read_file(events_path(dir.path(), i)));
    EXPECT_NE(manifest.find(tel), std::string::npos);
    EXPECT_NE(manifest.find(ev), std::string::npos);
    FileHeader h;
    Trace t = read_trace(dir.path(), i, &h);
    EXPECT_EQ(t.particle_index, i);
    EXPECT_EQ(h.scenario_name, "incline_block");
    EXPECT_EQ(h.scenario_digest, sha256_hex(read_file(dir.path() / kScenarioCopy)));
  }
  EXPECT_NE(manifest.find("# end: 4\n"), std::string::npos);
}

TEST(Sweep, StdoutIsTheTableOnly) {
  SweepConfig config;
  config.scenario = "rimless_wheel";
  config.axes = {{"body.wheel.com.x", -0.1, 0.1}, {"body.wheel.mass", 0.4, 0.6}};
  config.grid = 2;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_sweep(config, out, err), kExitOk) << err.str();
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# partrace sweep\n", 0), 0u);
  EXPECT_EQ(text.substr(text.size() - 9), "# end: 4\n");
  EXPECT_NE(text.find("# axis_a: body.wheel.com.x [m] -0.1 0.1\n"), std::string::npos);
  EXPECT_NE(text.find("# axis_b: body.wheel.mass [kg] 0.4 0.6\n"), std::string::npos);
  EXPECT_NE(err.str().find("4 points"), std::string::npos);
}

TEST(Sweep, NeedsExactlyOneMode) {
  SweepConfig config;
  config.scenario = "rimless_wheel";
  config.axes = {{"body.wheel.com.x", -0.1, 0.1}, {"body.wheel.mass", 0.4, 0.6}};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(config, out, err), kExitError);
  config.grid = 2;
  config.monte_carlo = 5;
  EXPECT_EQ(cmd_sweep(config, out, err), kExitError);
}

TEST(LoadSource, BundledNameAndPathAgree) {
  ScenarioSource a = load_source("bouncing_disc");
  ScenarioSource b = load_source(scenario_file("bouncing_disc"));
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(a.spec, b.spec);
  EXPECT_EQ(a.digest, sha256_hex(a.bytes));
}

}  // namespace
}  // namespace partrace
