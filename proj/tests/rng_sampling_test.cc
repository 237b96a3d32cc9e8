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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "partrace/param_path.h"
#include "partrace/rng.h"
#include "partrace/sampling.h"
#include "test_util.h"

namespace partrace {
namespace {

// Reference values computed with an independent big-integer implementation
// of the generator definition in docs/rng.md.
TEST(Rng, BitExactReferenceValues) {
  EXPECT_EQ(mix64(0), 0x0ULL);
  EXPECT_EQ(mix64(1), 0x5692161d100b05e5ULL);
  EXPECT_EQ(derive_seed(0, 0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(derive_seed(42, 7), 0xccf635ee9e9e2fa4ULL);
  EXPECT_EQ(fnv1a64("sensor.q.wheel.theta"), 0xae081eb535803239ULL);
  Stream s(derive_seed(0, 1), 0x696E697469616CULL);
  EXPECT_EQ(s.next_u64(), 0xe314a5cdab396bcdULL);
  EXPECT_EQ(s.next_u64(), 0x5411a1bacc0a4c9eULL);
  EXPECT_EQ(s.next_u64(), 0x8078b4cc996fde46ULL);
  Stream u(12345, 678);
  EXPECT_EQ(u.uniform(), 0.5568966644399583);
  EXPECT_EQ(u.uniform(), 0.17319851488842042);
  EXPECT_EQ(u.uniform(), 0.09715332649063446);
  EXPECT_EQ(u.draws(), 3u);
}

TEST(Rng, DerivedSeedsAreDistinct) {
  std::set<uint64_t> seen;
  for (uint64_t i = 0; i < 100000; ++i) ASSERT_TRUE(seen.insert(derive_seed(7, i)).second);
}

TEST(Rng, UniformStaysInUnitInterval) {
  Stream s(1, 2);
  for (int i = 0; i < 100000; ++i) {
    double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

ScenarioSpec disc_with(std::vector<ParamDistribution> ds) {
  ScenarioSpec s = testing::bundled("bouncing_disc");
  s.distributions = std::move(ds);
  validate_scenario(s);
  return s;
}

ParamDistribution normal(const std::string& target, double sigma, double trunc = 3.0) {
  ParamDistribution d;
  d.target = target;
  d.sigma = sigma;
  d.truncation = trunc;
  return d;
}

TEST(Sampling, ParticleZeroIsUnperturbed) {
  ScenarioSpec s = testing::bundled("curb_stepper");
  auto ps = make_particles(s, 3, 5);
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_TRUE(ps[0].unperturbed);
  for (const auto& [path, v] : ps[0].initial_offsets) EXPECT_EQ(v, 0.0) << path;
  EXPECT_EQ(apply_offsets(s, ps[0]), s);
  for (const auto& [path, v] : sample_jitter(ps[0], 12).values) EXPECT_EQ(v, 0.0) << path;
  EXPECT_FALSE(ps[1].unperturbed);
  EXPECT_EQ(ps[1].seed, derive_seed(5, 1));
  EXPECT_EQ(ps[0], unperturbed_particle(s, 5));
}

TEST(Sampling, ParticlesAreReproducible) {
  ScenarioSpec s = testing::bundled("rimless_wheel");
  EXPECT_EQ(make_particles(s, 20, 3), make_particles(s, 20, 3));
  EXPECT_NE(make_particles(s, 20, 3)[5], make_particles(s, 20, 4)[5]);
  // A particle's offsets do not depend on how many particles are drawn.
  EXPECT_EQ(make_particles(s, 6, 3)[5], make_particles(s, 60, 3)[5]);
  EXPECT_THROW(make_particles(s, 0, 3), SamplingError);
}

TEST(Sampling, JitterIsAFunctionOfSeedTickAndPath) {
  ScenarioSpec s = testing::bundled("curb_stepper");
  Particle p = make_particles(s, 2, 0)[1];
  JitterSample a = sample_jitter(p, 40), b = sample_jitter(p, 40), c = sample_jitter(p, 41);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_NE(a.value("sensor.q.lead_x"), a.value("sensor.q.lead_y"));
  EXPECT_EQ(a.value("sensor.q.trail_x"), 0.0);  // no distribution declared
}

TEST(Sampling, OffsetModes) {
  ParamDistribution add = normal("body.disc.mass", 0.1);
  ParamDistribution mul = normal("body.disc.inertia", 0.1);
  mul.mode = OffsetMode::kMultiplicative;
  ScenarioSpec s = disc_with({add, mul});
  Particle p = make_particles(s, 2, 9)[1];
  ScenarioSpec t = apply_offsets(s, p);
  EXPECT_DOUBLE_EQ(t.bodies[0].mass, 1.0 + p.initial_offsets[0].second);
  EXPECT_DOUBLE_EQ(t.bodies[0].inertia, 0.005 * (1.0 + p.initial_offsets[1].second));
}

TEST(Sampling, RelativeSigmaScalesWithTheExpectedValue) {
  ParamDistribution d;
  d.target = "body.disc.mass";
  d.sigma_rel = 0.05;
  EXPECT_DOUBLE_EQ(effective_sigma(d, 2.0), 0.1);
  EXPECT_DOUBLE_EQ(effective_sigma(d, -2.0), 0.1);
  d.sigma_rel.reset();
  d.sigma = 0.3;
  EXPECT_DOUBLE_EQ(effective_sigma(d, 2.0), 0.3);
}

TEST(Sampling, ImpossibleTruncationIsReported) {
  ScenarioSpec s = disc_with({normal("body.disc.mass", 0.1, 1e-12)});
  try {
    make_particles(s, 3, 0);
    FAIL() << "expected SamplingError";
  } catch (const SamplingError& e) {
    EXPECT_EQ(e.particle_index(), 1);
  }
}

TEST(Sampling, TruncationAndMomentsOnInitialDraws) {
  ParamDistribution u;
  u.target = "body.disc.inertia";
  u.kind = DistributionKind::kUniform;
  u.lo = -0.001;
  u.hi = 0.003;
  ScenarioSpec s = disc_with({normal("body.disc.mass", 0.1, 2.0), u});
  const int n = 20000;
  double m0 = 0, v0 = 0, m1 = 0, v1 = 0;
  for (int i = 0; i < n; ++i) {
    auto x = sample_initial(s, derive_seed(1, i));
    ASSERT_LE(std::abs(x[0]), 0.2);
    ASSERT_GE(x[1], -0.001);
    ASSERT_LE(x[1], 0.003);
    m0 += x[0];
    v0 += x[0] * x[0];
    m1 += x[1];
    v1 += x[1] * x[1];
  }
  m0 /= n;
  m1 /= n;
  v0 = v0 / n - m0 * m0;
  v1 = v1 / n - m1 * m1;
  // Normal truncated at 2 sigma: variance factor 1 - 2 k phi(k) / (2 Phi(k) - 1).
  const double k = 2.0, phi = std::exp(-0.5 * k * k) / std::sqrt(2.0 * M_PI);
  const double factor = 1.0 - 2.0 * k * phi / std::erf(k / std::sqrt(2.0));
  EXPECT_NEAR(m0, 0.0, 0.03 * 0.1);
  EXPECT_NEAR(v0 / (0.01 * factor), 1.0, 0.05);
  EXPECT_NEAR(m1, 0.001, 0.03 * 0.002);
  EXPECT_NEAR(v1 / (0.004 * 0.004 / 12.0), 1.0, 0.05);
}

}  // namespace
}  // namespace partrace
