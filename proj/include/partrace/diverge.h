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

// Divergence detection over sets of traces.
//
// Sequences and novelty look at contact onsets only (impacts and joint
// limit hits). Liftoff and stick/slip events are kept in the traces but
// left out here: they follow from the onsets and chatter under noise.

#ifndef PARTRACE_DIVERGE_H_
#define PARTRACE_DIVERGE_H_

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "partrace/trace.h"
#include "partrace/trace_runner.h"

namespace partrace {

struct EventSymbol {
  EventKind kind = EventKind::kImpact;
  std::string pair_a;
  std::string pair_b;
  friend auto operator<=>(const EventSymbol&, const EventSymbol&) = default;
  friend bool operator==(const EventSymbol&, const EventSymbol&) = default;

  // "impact:lead_foot/ground"
  std::string text() const;
};

using EventSequence = std::vector<EventSymbol>;

inline constexpr double kDefaultDedupWindow = 0.01;
inline constexpr double kDefaultNoveltyWindow = 0.1;
inline constexpr double kDefaultSupport = 0.5;
inline constexpr int kDefaultLinkThreshold = 0;

bool is_onset(EventKind kind);

// Time-ordered onset symbols. A repeat of the previous symbol within
// `dedup_window` seconds of its last occurrence is dropped, as is an impact
// within `dedup_window` seconds after a liftoff of the same pair.
EventSequence event_sequence(const Trace& trace, double dedup_window = kDefaultDedupWindow);

struct NovelEvent {
  int trace = 0;  // particle index
  ContactEvent event;
  double support = 0.0;  // fraction of the other valid traces with a match
};

// Onset events (chatter impacts excluded, as in event_sequence) whose
// (kind, pair) occurs within +-window in fewer than a
// `support_threshold` fraction of the other valid traces (strictly less).
// Throws std::invalid_argument when fewer than two traces are valid.
std::vector<NovelEvent> novel_events(const std::vector<Trace>& traces,
                                     double window = kDefaultNoveltyWindow,
                                     double support_threshold = kDefaultSupport);

// Levenshtein distance with unit costs.
int sequence_distance(const EventSequence& a, const EventSequence& b);

struct SequenceCluster {
  std::vector<int> members;  // particle indices, ascending
  EventSequence representative;
  int representative_trace = 0;
};

struct Clustering {
  std::vector<SequenceCluster> clusters;  // ordered by lowest member
  std::vector<std::vector<int>> distances;  // between representatives
};

// Single-linkage clustering: two traces share a cluster when a chain of
// sequences with pairwise distance <= link_threshold joins them. The
// representative is the most common sequence (ties: lowest particle index).
Clustering cluster_sequences(const std::vector<std::pair<int, EventSequence>>& sequences,
                             int link_threshold = kDefaultLinkThreshold);
// Over the valid traces.
Clustering cluster_traces(const std::vector<Trace>& traces,
                          int link_threshold = kDefaultLinkThreshold,
                          double dedup_window = kDefaultDedupWindow);

struct Histogram {
  double bin_width = 0.0;
  std::vector<int> counts;  // bin i covers [i w, (i + 1) w)
};

Histogram histogram(const std::vector<double>& values, double bin_width, double upper);

struct OutcomeStats {
  std::map<std::string, int> counts;  // by outcome label, invalid included
  int total = 0;
  int valid = 0;
  double success_rate = 0.0;  // successes over valid traces
  bool divergence = false;    // more than one label among valid traces
  std::vector<double> fall_times;
  Histogram fall_histogram;
};

OutcomeStats outcome_partition(const std::vector<Trace>& traces, double duration,
                               double bin_width = 0.25);

// Groups sorted values into runs whose neighbours are at most `max_gap`
// apart; returns [first, last] per run.
std::vector<std::pair<double, double>> value_clusters(std::vector<double> values, double max_gap);

struct BifurcationInterval {
  std::string path;
  double lo = 0.0;
  double hi = 0.0;
  Outcome outcome_lo;
  Outcome outcome_hi;
  int simulations = 0;
};

class NoBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bisects the scalar at `path` with every stochastic channel off until the
// interval is no wider than `tol`. The endpoints always have different
// outcome kinds. Throws NoBracketError when the initial endpoints agree and
// ScenarioError when the path does not resolve.
BifurcationInterval localize_bifurcation(const ScenarioSpec& spec, const std::string& path,
                                         double lo, double hi, double tol,
                                         const RunOptions& options = {});

struct DivergenceReport {
  std::vector<NovelEvent> novel;
  bool novelty_skipped = false;
  Clustering clustering;
  OutcomeStats outcomes;
  std::vector<BifurcationInterval> bifurcations;
  bool divergent() const;
};

DivergenceReport analyze_traces(const std::vector<Trace>& traces, double duration,
                                double window = kDefaultNoveltyWindow,
                                double support_threshold = kDefaultSupport,
                                int link_threshold = kDefaultLinkThreshold);

}  // namespace partrace

#endif  // PARTRACE_DIVERGE_H_
