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

#include "partrace/diverge.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "partrace/param_path.h"

namespace partrace {
namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

ScenarioSpec with_value(const ScenarioSpec& spec, const std::string& path, double v) {
  ScenarioSpec out = spec;
  resolve_path(out, path).write(v);
  validate_scenario(out);
  return out;
}

// Onset events, minus impacts within `chatter_window` after a liftoff of the
// same pair.
std::vector<const ContactEvent*> onset_events(const Trace& trace, double chatter_window) {
  std::vector<const ContactEvent*> out;
  std::map<std::pair<std::string, std::string>, double> last_liftoff;
  for (const ContactEvent& e : trace.events) {
    if (e.kind == EventKind::kLiftoff) {
      last_liftoff[{e.pair_a, e.pair_b}] = e.t;
      continue;
    }
    if (!is_onset(e.kind)) continue;
    if (e.kind == EventKind::kImpact) {
      auto it = last_liftoff.find({e.pair_a, e.pair_b});
      if (it != last_liftoff.end() && e.t - it->second <= chatter_window) continue;
    }
    out.push_back(&e);
  }
  return out;
}

}  // namespace

std::string EventSymbol::text() const {
  return std::string(event_kind_name(kind)) + ":" + pair_a + "/" + pair_b;
}

bool is_onset(EventKind kind) {
  return kind == EventKind::kImpact || kind == EventKind::kJointLimitHit;
}

EventSequence event_sequence(const Trace& trace, double dedup_window) {
  EventSequence out;
  double last_t = 0.0;
  for (const ContactEvent* e : onset_events(trace, dedup_window)) {
    EventSymbol s{e->kind, e->pair_a, e->pair_b};
    if (!out.empty() && out.back() == s && e->t - last_t <= dedup_window) {
      last_t = e->t;
      continue;
    }
    out.push_back(std::move(s));
    last_t = e->t;
  }
  return out;
}

std::vector<NovelEvent> novel_events(const std::vector<Trace>& traces, double window,
                                     double support_threshold) {
  std::vector<const Trace*> valid;
  for (const Trace& t : traces) {
    if (t.outcome.valid()) valid.push_back(&t);
  }
  if (valid.size() < 2) {
    throw std::invalid_argument("novel_events needs at least two valid traces");
  }
  // Per trace: symbol -> sorted onset times.
  std::vector<std::map<EventSymbol, std::vector<double>>> index(valid.size());
  for (size_t i = 0; i < valid.size(); ++i) {
    for (const ContactEvent* e : onset_events(*valid[i], kDefaultDedupWindow)) {
      index[i][{e->kind, e->pair_a, e->pair_b}].push_back(e->t);
    }
  }
  std::vector<NovelEvent> out;
  const double others = static_cast<double>(valid.size() - 1);
  for (size_t i = 0; i < valid.size(); ++i) {
    for (const ContactEvent* ep : onset_events(*valid[i], kDefaultDedupWindow)) {
      const ContactEvent& e = *ep;
      EventSymbol s{e.kind, e.pair_a, e.pair_b};
      int matches = 0;
      for (size_t j = 0; j < valid.size(); ++j) {
        if (j == i) continue;
        auto it = index[j].find(s);
        if (it == index[j].end()) continue;
        auto lo = std::lower_bound(it->second.begin(), it->second.end(), e.t - window);
        if (lo != it->second.end() && *lo <= e.t + window) ++matches;
      }
      double support = matches / others;
      if (support < support_threshold) out.push_back({valid[i]->particle_index, e, support});
    }
  }
  return out;
}

int sequence_distance(const EventSequence& a, const EventSequence& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Clustering cluster_sequences(const std::vector<std::pair<int, EventSequence>>& sequences,
                             int link_threshold) {
  // Work on distinct sequences; identical ones are at distance 0 and always
  // share a cluster.
  std::map<EventSequence, std::vector<int>> groups;
  for (const auto& [index, seq] : sequences) groups[seq].push_back(index);
  std::vector<const EventSequence*> uniq;
  std::vector<std::vector<int>> uniq_members;
  for (auto& [seq, members] : groups) {
    std::sort(members.begin(), members.end());
    uniq.push_back(&seq);
    uniq_members.push_back(members);
  }
  const int n = static_cast<int>(uniq.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (find_root(parent, i) == find_root(parent, j)) continue;
      if (sequence_distance(*uniq[i], *uniq[j]) <= link_threshold) {
        parent[find_root(parent, j)] = find_root(parent, i);
      }
    }
  }
  std::map<int, std::vector<int>> by_root;
  for (int i = 0; i < n; ++i) by_root[find_root(parent, i)].push_back(i);

  Clustering out;
  for (const auto& [root, items] : by_root) {
    SequenceCluster c;
    int best = -1;
    for (int u : items) {
      c.members.insert(c.members.end(), uniq_members[u].begin(), uniq_members[u].end());
      if (best < 0 || uniq_members[u].size() > uniq_members[best].size() ||
          (uniq_members[u].size() == uniq_members[best].size() &&
           uniq_members[u].front() < uniq_members[best].front())) {
        best = u;
      }
    }
    std::sort(c.members.begin(), c.members.end());
    c.representative = *uniq[best];
    c.representative_trace = uniq_members[best].front();
    out.clusters.push_back(std::move(c));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const SequenceCluster& a, const SequenceCluster& b) {
              return a.members.front() < b.members.front();
            });
  const size_t k = out.clusters.size();
  out.distances.assign(k, std::vector<int>(k, 0));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      int d = sequence_distance(out.clusters[i].representative, out.clusters[j].representative);
      out.distances[i][j] = out.distances[j][i] = d;
    }
  }
  return out;
}

Clustering cluster_traces(const std::vector<Trace>& traces, int link_threshold,
                          double dedup_window) {
  std::vector<std::pair<int, EventSequence>> seqs;
  for (const Trace& t : traces) {
    if (t.outcome.valid()) seqs.emplace_back(t.particle_index, event_sequence(t, dedup_window));
  }
  return cluster_sequences(seqs, link_threshold);
}

Histogram histogram(const std::vector<double>& values, double bin_width, double upper) {
  Histogram h;
  h.bin_width = bin_width;
  const int bins = std::max(1, static_cast<int>(std::ceil(upper / bin_width - 1e-9)));
  h.counts.assign(bins, 0);
  for (double v : values) {
    int b = std::clamp(static_cast<int>(std::floor(v / bin_width)), 0, bins - 1);
    ++h.counts[b];
  }
  return h;
}

OutcomeStats outcome_partition(const std::vector<Trace>& traces, double duration,
                               double bin_width) {
  OutcomeStats s;
  int success = 0;
  for (const Trace& t : traces) {
    ++s.total;
    ++s.counts[outcome_label(t.outcome.kind)];
    if (!t.outcome.valid()) continue;
    ++s.valid;
    if (t.outcome.kind == Outcome::Kind::kSuccess) ++success;
    if (t.outcome.kind == Outcome::Kind::kFall) s.fall_times.push_back(t.outcome.t);
  }
  s.success_rate = s.valid > 0 ? static_cast<double>(success) / s.valid : 0.0;
  int labels = 0;
  for (const auto& [label, count] : s.counts) {
    if (label != outcome_label(Outcome::Kind::kInvalid) && count > 0) ++labels;
  }
  s.divergence = labels > 1;
  s.fall_histogram = histogram(s.fall_times, bin_width, duration);
  return s;
}

std::vector<std::pair<double, double>> value_clusters(std::vector<double> values, double max_gap) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  for (double v : values) {
    if (out.empty() || v - out.back().second > max_gap) {
      out.emplace_back(v, v);
    } else {
      out.back().second = v;
    }
  }
  return out;
}

BifurcationInterval localize_bifurcation(const ScenarioSpec& spec, const std::string& path,
                                         double lo, double hi, double tol,
                                         const RunOptions& options) {
  BifurcationInterval out;
  out.path = path;
  auto probe = [&](double v) {
    ScenarioSpec s = with_value(spec, path, v);
    ++out.simulations;
    return simulate_trace(s, unperturbed_particle(s, 0), options).outcome;
  };
  out.lo = lo;
  out.hi = hi;
  out.outcome_lo = probe(lo);
  out.outcome_hi = probe(hi);
  if (out.outcome_lo.kind == out.outcome_hi.kind) {
    throw NoBracketError("no bracket: both ends of [" + format_double(lo) + ", " +
                         format_double(hi) + "] give '" + outcome_label(out.outcome_lo.kind) +
                         "'");
  }
  while (out.hi - out.lo > tol) {
    const double mid = 0.5 * (out.lo + out.hi);
    if (mid <= out.lo || mid >= out.hi) break;
    Outcome o = probe(mid);
    if (o.kind == out.outcome_lo.kind) {
      out.lo = mid;
      out.outcome_lo = o;
    } else {
      out.hi = mid;
      out.outcome_hi = o;
    }
  }
  return out;
}

bool DivergenceReport::divergent() const {
  return outcomes.divergence || clustering.clusters.size() > 1 || !novel.empty();
}

DivergenceReport analyze_traces(const std::vector<Trace>& traces, double duration, double window,
                                double support_threshold, int link_threshold) {
  DivergenceReport r;
  r.outcomes = outcome_partition(traces, duration);
  if (r.outcomes.valid >= 2) {
    r.novel = novel_events(traces, window, support_threshold);
  } else {
    r.novelty_skipped = true;
  }
  r.clustering = cluster_traces(traces, link_threshold);
  return r;
}

}  // namespace partrace
