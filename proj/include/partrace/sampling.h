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

// Particles: a seed plus sampled offsets of the true model from the expected
// model, and the per-control-tick noise streams derived from that seed.

#ifndef PARTRACE_SAMPLING_H_
#define PARTRACE_SAMPLING_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "partrace/model.h"

namespace partrace {

struct Particle {
  int index = 0;
  uint64_t seed = 0;
  bool unperturbed = false;  // offsets all zero and noise switched off
  // (target path, offset), in distribution order.
  std::vector<std::pair<std::string, double>> initial_offsets;
  std::vector<ParamDistribution> jitter_spec;  // the per_step distributions
  friend bool operator==(const Particle&, const Particle&) = default;
};

struct JitterSample {
  int64_t control_tick = 0;
  std::vector<std::pair<std::string, double>> values;  // jitter_spec order

  // Value for `path`, 0 when the path has no per_step distribution.
  double value(const std::string& path) const;
};

class SamplingError : public std::runtime_error {
 public:
  SamplingError(int particle_index, const std::string& message)
      : std::runtime_error(message), particle_index_(particle_index) {}
  int particle_index() const { return particle_index_; }

 private:
  int particle_index_;
};

inline constexpr int kMaxRejections = 1000000;

// Spread of the offset distribution: sigma, or sigma_rel * |expected value|.
double effective_sigma(const ParamDistribution& d, double expected);

// One offset per phase=initial distribution of `spec`, drawn in list order
// from the particle's initial stream. Throws SamplingError(-1, ...) when
// rejection sampling exceeds kMaxRejections.
std::vector<double> sample_initial(const ScenarioSpec& spec, uint64_t seed);

// Deterministic in (particle.seed, tick, path); zero for unperturbed particles.
JitterSample sample_jitter(const Particle& particle, int64_t control_tick);

std::vector<Particle> make_particles(const ScenarioSpec& spec, int count, uint64_t master_seed);

// Copy of `expected` with the particle's initial offsets applied.
ScenarioSpec apply_offsets(const ScenarioSpec& expected, const Particle& particle);

// Particle 0 of every run: the expected model, no noise.
Particle unperturbed_particle(const ScenarioSpec& spec, uint64_t master_seed);

}  // namespace partrace

#endif  // PARTRACE_SAMPLING_H_
