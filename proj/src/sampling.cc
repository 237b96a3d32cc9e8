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

#include "partrace/sampling.h"

#include <algorithm>
#include <cmath>

#include "partrace/param_path.h"
#include "partrace/rng.h"

namespace partrace {
namespace {

// Stream keys. Initial offsets use a fixed key; jitter keys mix the tick and
// the path hash so each (tick, channel) pair owns an independent stream.
constexpr uint64_t kInitialKey = 0x696E697469616CULL;  // "initial"

uint64_t jitter_key(int64_t tick, const std::string& path) {
  return mix64(static_cast<uint64_t>(tick) + kGolden) ^ fnv1a64(path);
}

double draw(const ParamDistribution& d, double sigma, Stream& stream) {
  if (d.kind == DistributionKind::kUniform) {
    if (d.lo == d.hi) return d.lo;
    return std::min(d.hi, d.lo + (d.hi - d.lo) * stream.uniform());
  }
  if (sigma == 0.0) return d.mean;
  for (int i = 0; i < kMaxRejections; ++i) {
    double z = stream.normal();
    if (std::abs(z) <= d.truncation) return d.mean + sigma * z;
  }
  throw SamplingError(-1, "rejection sampling for '" + d.target + "' exceeded " +
                              std::to_string(kMaxRejections) + " draws");
}

}  // namespace

double JitterSample::value(const std::string& path) const {
  for (const auto& [p, v] : values) {
    if (p == path) return v;
  }
  return 0.0;
}

double effective_sigma(const ParamDistribution& d, double expected) {
  return d.sigma_rel ? *d.sigma_rel * std::abs(expected) : d.sigma;
}

std::vector<double> sample_initial(const ScenarioSpec& spec, uint64_t seed) {
  Stream stream(seed, kInitialKey);
  std::vector<double> out;
  for (const ParamDistribution& d : spec.distributions) {
    if (d.phase != SamplePhase::kInitial) continue;
    out.push_back(draw(d, effective_sigma(d, read_path(spec, d.target)), stream));
  }
  return out;
}

JitterSample sample_jitter(const Particle& particle, int64_t control_tick) {
  JitterSample sample;
  sample.control_tick = control_tick;
  for (const ParamDistribution& d : particle.jitter_spec) {
    double v = 0.0;
    if (!particle.unperturbed) {
      Stream stream(particle.seed, jitter_key(control_tick, d.target));
      v = draw(d, effective_sigma(d, 0.0), stream);
    }
    sample.values.emplace_back(d.target, v);
  }
  return sample;
}

Particle unperturbed_particle(const ScenarioSpec& spec, uint64_t master_seed) {
  Particle p;
  p.index = 0;
  p.seed = derive_seed(master_seed, 0);
  p.unperturbed = true;
  for (const ParamDistribution& d : spec.distributions) {
    if (d.phase == SamplePhase::kInitial) {
      p.initial_offsets.emplace_back(d.target, 0.0);
    } else {
      p.jitter_spec.push_back(d);
    }
  }
  return p;
}

std::vector<Particle> make_particles(const ScenarioSpec& spec, int count, uint64_t master_seed) {
  if (count < 1) throw SamplingError(-1, "particle count must be >= 1");
  std::vector<Particle> out;
  out.reserve(count);
  out.push_back(unperturbed_particle(spec, master_seed));
  for (int i = 1; i < count; ++i) {
    Particle p;
    p.index = i;
    p.seed = derive_seed(master_seed, static_cast<uint64_t>(i));
    std::vector<double> offsets;
    try {
      offsets = sample_initial(spec, p.seed);
    } catch (const SamplingError& e) {
      throw SamplingError(i, "particle " + std::to_string(i) + ": " + e.what());
    }
    size_t k = 0;
    for (const ParamDistribution& d : spec.distributions) {
      if (d.phase == SamplePhase::kInitial) {
        p.initial_offsets.emplace_back(d.target, offsets[k++]);
      } else {
        p.jitter_spec.push_back(d);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

ScenarioSpec apply_offsets(const ScenarioSpec& expected, const Particle& particle) {
  ScenarioSpec truth = expected;
  for (const auto& [path, offset] : particle.initial_offsets) {
    const ParamDistribution* d = nullptr;
    for (const ParamDistribution& cand : expected.distributions) {
      if (cand.target == path) d = &cand;
    }
    ParamRef ref = resolve_path(truth, path);
    double base = ref.read();
    bool multiplicative = d && d->mode == OffsetMode::kMultiplicative;
    ref.write(multiplicative ? base * (1.0 + offset) : base + offset);
  }
  return truth;
}

}  // namespace partrace
