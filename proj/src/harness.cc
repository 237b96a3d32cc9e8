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

#include "partrace/harness.h"

#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "partrace/digest.h"
#include "partrace/scenario_io.h"

namespace partrace {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string header_lines(const FileHeader& h, std::string_view magic) {
  std::ostringstream out;
  out << "# " << magic << "\n";
  out << "# tool_version: " << h.tool_version << "\n";
  out << "# master_seed: " << h.master_seed << "\n";
  out << "# scenario: " << h.scenario_name << "\n";
  out << "# scenario_sha256: " << h.scenario_digest << "\n";
  return out.str();
}

struct ManifestRow {
  int particle = 0;
  uint64_t seed = 0;
  std::string outcome;
  std::string telemetry_file;
  std::string events_file;
  std::string telemetry_digest;
  std::string events_digest;
};

struct Manifest {
  FileHeader header;
  int particles = 0;
  double duration = 0.0;
  std::vector<ManifestRow> rows;
};

std::string manifest_text(const Manifest& m) {
  std::ostringstream out;
  out << header_lines(m.header, "partrace manifest");
  out << "# scenario_file: " << kScenarioCopy << "\n";
  out << "# particles: " << m.particles << "\n";
  out << "# duration: " << format_double(m.duration) << "\n";
  out << "# columns: particle\tseed\toutcome\ttelemetry\tevents\ttelemetry_sha256\tevents_sha256\n";
  for (const ManifestRow& r : m.rows) {
    out << r.particle << "\t" << r.seed << "\t" << r.outcome << "\t" << r.telemetry_file << "\t"
        << r.events_file << "\t" << r.telemetry_digest << "\t" << r.events_digest << "\n";
  }
  out << "# end: " << m.rows.size() << "\n";
  return out.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Manifest parse_manifest(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  bool ended = false;
  auto value = [](const std::string& l, const std::string& key) -> std::optional<std::string> {
    std::string prefix = "# " + key + ": ";
    if (l.rfind(prefix, 0) == 0) return l.substr(prefix.size());
    return std::nullopt;
  };
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      if (auto v = value(line, "tool_version")) m.header.tool_version = *v;
      if (auto v = value(line, "master_seed")) m.header.master_seed = std::stoull(*v);
      if (auto v = value(line, "scenario")) m.header.scenario_name = *v;
      if (auto v = value(line, "scenario_sha256")) m.header.scenario_digest = *v;
      if (auto v = value(line, "particles")) m.particles = std::stoi(*v);
      if (auto v = value(line, "duration")) m.duration = std::stod(*v);
      if (value(line, "end")) ended = true;
      continue;
    }
    auto cells = split(line, '\t');
    if (cells.size() != 7) throw std::runtime_error("malformed manifest row: " + line);
    ManifestRow r;
    r.particle = std::stoi(cells[0]);
    r.seed = std::stoull(cells[1]);
    r.outcome = cells[2];
    r.telemetry_file = cells[3];
    r.events_file = cells[4];
    r.telemetry_digest = cells[5];
    r.events_digest = cells[6];
    m.rows.push_back(std::move(r));
  }
  if (!ended || static_cast<int>(m.rows.size()) != m.particles) {
    throw std::runtime_error("manifest is incomplete");
  }
  return m;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw std::runtime_error("cannot create directory " + dir.string());
}

std::string json_header(const FileHeader& h) {
  nlohmann::json j;
  j["tool_version"] = h.tool_version;
  j["master_seed"] = h.master_seed;
  j["scenario"] = h.scenario_name;
  j["scenario_sha256"] = h.scenario_digest;
  return j.dump();
}

std::string report_text(const DivergenceReport& r, const FileHeader& header,
                        const AnalyzeConfig& config, const std::vector<std::string>& problems) {
  std::ostringstream out;
  out << header_lines(header, "partrace divergence report");
  out << "# window: " << format_double(config.window) << " s, support: "
      << format_double(config.support) << ", link_threshold: " << config.link_threshold << "\n\n";
  for (const std::string& p : problems) out << "warning: " << p << "\n";
  if (!problems.empty()) out << "\n";

  const OutcomeStats& o = r.outcomes;
  out << "outcomes (" << o.total << " traces, " << o.valid << " valid)\n";
  for (const auto& [label, count] : o.counts) out << "  " << label << ": " << count << "\n";
  out << "  success_rate: " << std::fixed << std::setprecision(4) << o.success_rate << "\n";
  out << "  mixed outcomes: " << (o.divergence ? "yes" : "no") << "\n";
  out.unsetf(std::ios::fixed);
  if (!o.fall_times.empty()) {
    out << "  fall times histogram (bin " << format_double(o.fall_histogram.bin_width) << " s):\n";
    for (size_t i = 0; i < o.fall_histogram.counts.size(); ++i) {
      if (o.fall_histogram.counts[i] == 0) continue;
      out << "    [" << format_double(i * o.fall_histogram.bin_width) << ", "
          << format_double((i + 1) * o.fall_histogram.bin_width)
          << "): " << o.fall_histogram.counts[i] << "\n";
    }
  }
  out << "\nsequence clusters: " << r.clustering.clusters.size() << "\n";
  for (size_t i = 0; i < r.clustering.clusters.size(); ++i) {
    const SequenceCluster& c = r.clustering.clusters[i];
    out << "  cluster " << i << ": " << c.members.size() << " traces, representative trace "
        << c.representative_trace << "\n    ";
    for (size_t k = 0; k < c.representative.size(); ++k) {
      out << (k ? " " : "") << c.representative[k].text();
    }
    out << "\n";
  }
  if (r.clustering.clusters.size() > 1) {
    out << "  representative distances:\n";
    for (const auto& row : r.clustering.distances) {
      out << "   ";
      for (int d : row) out << " " << d;
      out << "\n";
    }
  }
  out << "\nnovel events: ";
  if (r.novelty_skipped) {
    out << "skipped (fewer than two valid traces)\n";
  } else {
    out << r.novel.size() << "\n";
    for (const NovelEvent& n : r.novel) {
      out << "  trace " << n.trace << " t=" << format_double(n.event.t) << " "
          << event_kind_name(n.event.kind) << " " << n.event.pair_a << "/" << n.event.pair_b
          << " at (" << format_double(n.event.point.x) << ", " << format_double(n.event.point.y)
          << ") support " << format_double(n.support) << "\n";
    }
  }
  out << "\ndivergence: " << (r.divergent() ? "flagged" : "none") << "\n";
  return out.str();
}

std::string summary_json(const DivergenceReport& r, const FileHeader& header) {
  nlohmann::json j = nlohmann::json::parse(json_header(header));
  j["outcomes"] = r.outcomes.counts;
  j["total"] = r.outcomes.total;
  j["valid"] = r.outcomes.valid;
  j["success_rate"] = r.outcomes.success_rate;
  j["mixed_outcomes"] = r.outcomes.divergence;
  j["fall_times"] = r.outcomes.fall_times;
  j["fall_histogram"] = {{"bin_width", r.outcomes.fall_histogram.bin_width},
                         {"counts", r.outcomes.fall_histogram.counts}};
  nlohmann::json clusters = nlohmann::json::array();
  for (const SequenceCluster& c : r.clustering.clusters) {
    std::vector<std::string> seq;
    for (const EventSymbol& s : c.representative) seq.push_back(s.text());
    clusters.push_back({{"members", c.members},
                        {"representative_trace", c.representative_trace},
                        {"representative", seq}});
  }
  j["clusters"] = clusters;
  j["cluster_distances"] = r.clustering.distances;
  j["novelty_skipped"] = r.novelty_skipped;
  nlohmann::json novel = nlohmann::json::array();
  for (const NovelEvent& n : r.novel) {
    novel.push_back({{"trace", n.trace},
                     {"t", n.event.t},
                     {"kind", event_kind_name(n.event.kind)},
                     {"pair", {n.event.pair_a, n.event.pair_b}},
                     {"point", {n.event.point.x, n.event.point.y}},
                     {"support", n.support}});
  }
  j["novel_events"] = novel;
  j["divergence"] = r.divergent();
  return j.dump(2) + "\n";
}

}  // namespace

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

int default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

ScenarioSource load_source(const std::string& name_or_path) {
  ScenarioSource s;
  s.path = name_or_path;
  if (!fs::exists(s.path)) {
    fs::path bundled = bundled_scenario_path(name_or_path);
    if (fs::exists(bundled)) s.path = bundled;
  }
  s.spec = load_scenario_file(s.path, &s.bytes);
  s.digest = sha256_hex(s.bytes);
  return s;
}

FileHeader file_header(const ScenarioSource& source, uint64_t master_seed) {
  return {PARTRACE_VERSION, master_seed, source.spec.name, source.digest};
}

std::vector<Trace> run_particles(const ScenarioSpec& spec, int particles, uint64_t master_seed,
                                 int workers, const RunOptions& options) {
  const std::vector<Particle> ps = make_particles(spec, particles, master_seed);
  auto controller = make_controller(spec);
  std::vector<Trace> traces(ps.size());
  parallel_for(static_cast<int>(ps.size()), workers,
               [&](int i) { traces[i] = simulate_trace(spec, ps[i], *controller, options); });
  return traces;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  try {
    if (config.particles < 1) throw std::invalid_argument("--particles must be at least 1");
    if (config.workers < 1) throw std::invalid_argument("--workers must be at least 1");
    ScenarioSource source = load_source(config.scenario);
    const ScenarioSpec& spec = source.spec;
    auto controller = make_controller(spec);
    const FileHeader header = file_header(source, config.seed);
    ensure_dir(config.out);
    write_file(config.out / kScenarioCopy, source.bytes);

    const std::vector<Particle> particles = make_particles(spec, config.particles, config.seed);
    Manifest manifest;
    manifest.header = header;
    manifest.particles = config.particles;
    manifest.duration = spec.duration;
    manifest.rows.resize(particles.size());
    std::vector<double> wall(particles.size(), 0.0);
    std::mutex log_mutex;
    parallel_for(static_cast<int>(particles.size()), config.workers, [&](int i) {
      Trace trace = simulate_trace(spec, particles[i], *controller);
      const std::string telemetry = telemetry_text(trace, header);
      const std::string events = events_text(trace, header);
      fs::path tp = telemetry_path(config.out, trace.particle_index);
      fs::path ep = events_path(config.out, trace.particle_index);
      write_file(tp, telemetry);
      write_file(ep, events);
      ManifestRow& row = manifest.rows[i];
      row.particle = trace.particle_index;
      row.seed = trace.seed;
      row.outcome = outcome_label(trace.outcome.kind);
      row.telemetry_file = tp.filename().string();
      row.events_file = ep.filename().string();
      row.telemetry_digest = sha256_hex(telemetry);
      row.events_digest = sha256_hex(events);
      wall[i] = trace.wall_time;
      std::lock_guard<std::mutex> lock(log_mutex);
      out << "trace " << trace.particle_index << ": " << row.outcome;
      if (!trace.outcome.valid()) out << " (" << trace.outcome.reason << ")";
      out << ", wall " << std::setprecision(4) << trace.wall_time << " s\n";
    });
    write_file(config.out / kManifestFile, manifest_text(manifest));

    const double total = seconds_since(start);
    const double m = config.particles * spec.duration / (total / config.workers);
    std::ostringstream timing;
    timing << header_lines(header, "partrace timing");
    timing << "# workers: " << config.workers << "\n";
    timing << "# total_wall_time: " << format_double(total) << "\n";
    timing << "# realtime_factor: " << format_double(m) << "\n";
    timing << "# columns: particle\twall_time\n# units: -\ts\n";
    for (size_t i = 0; i < wall.size(); ++i) {
      timing << manifest.rows[i].particle << "\t" << format_double(wall[i]) << "\n";
    }
    timing << "# end: " << wall.size() << "\n";
    write_file(config.out / kTimingFile, timing.str());

    int invalid = 0;
    for (const ManifestRow& r : manifest.rows) invalid += r.outcome == "invalid";
    out << config.particles << " traces in " << std::setprecision(4) << total << " s on "
        << config.workers << " workers, real-time factor m = " << m << "\n";
    if (invalid > 0) {
      err << invalid << " invalid trace(s)\n";
      if (!config.allow_invalid) return kExitError;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_analyze(const AnalyzeConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Manifest manifest = parse_manifest(read_file(config.run_dir / kManifestFile));
    std::vector<Trace> traces;
    std::vector<std::string> problems;
    for (const ManifestRow& row : manifest.rows) {
      try {
        std::string tel = read_file(config.run_dir / row.telemetry_file);
        std::string ev = read_file(config.run_dir / row.events_file);
        if (sha256_hex(tel) != row.telemetry_digest || sha256_hex(ev) != row.events_digest) {
          throw std::runtime_error("digest does not match manifest");
        }
        traces.push_back(parse_trace(tel, ev));
      } catch (const std::exception& e) {
        problems.push_back("trace " + std::to_string(row.particle) + " skipped: " + e.what());
      }
    }
    for (const std::string& p : problems) err << "warning: " << p << "\n";
    if (traces.empty()) throw std::runtime_error("no readable traces in " + config.run_dir.string());

    DivergenceReport report = analyze_traces(traces, manifest.duration, config.window,
                                             config.support, config.link_threshold);
    if (report.novelty_skipped) {
      err << "warning: fewer than two valid traces, novelty analysis skipped\n";
    }
    const std::string text = report_text(report, manifest.header, config, problems);
    write_file(config.run_dir / "report.txt", text);
    write_file(config.run_dir / "summary.json", summary_json(report, manifest.header));

    std::ostringstream clusters;
    clusters << header_lines(manifest.header, "partrace clusters");
    clusters << "# columns: particle\tcluster\n";
    for (size_t c = 0; c < report.clustering.clusters.size(); ++c) {
      for (int m : report.clustering.clusters[c].members) clusters << m << "\t" << c << "\n";
    }
    write_file(config.run_dir / "clusters.tsv", clusters.str());

    std::ostringstream hist;
    hist << header_lines(manifest.header, "partrace fall histogram");
    hist << "# columns: bin_start\tbin_end\tcount\n# units: s\ts\t-\n";
    const Histogram& h = report.outcomes.fall_histogram;
    for (size_t i = 0; i < h.counts.size(); ++i) {
      hist << format_double(i * h.bin_width) << "\t" << format_double((i + 1) * h.bin_width)
           << "\t" << h.counts[i] << "\n";
    }
    write_file(config.run_dir / "fall_histogram.tsv", hist.str());

    out << text;
    return report.divergent() ? kExitDivergence : kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_sweep(const SweepConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.axes.size() != 2) throw std::invalid_argument("sweep needs exactly two axes");
    if ((config.grid > 0) == (config.monte_carlo > 0)) {
      throw std::invalid_argument("give exactly one of --grid and --mc");
    }
    ScenarioSource source = load_source(config.scenario);
    const FileHeader header = file_header(source, config.seed);
    SweepResult r = config.grid > 0
                        ? stability_sweep_grid(source.spec, config.axes[0], config.axes[1],
                                               config.grid, config.workers)
                        : stability_sweep_mc(source.spec, config.axes[0], config.axes[1],
                                             config.monte_carlo, config.seed, config.workers);
    const std::string text = sweep_text(r, header);
    if (config.out.empty()) {
      out << text;
    } else {
      ensure_dir(config.out);
      fs::path file = config.out / (config.grid > 0 ? "sweep_grid.tsv" : "sweep_mc.tsv");
      write_file(file, text);
      out << "wrote " << file.string() << "\n";
    }
    int falls = 0, invalid = 0;
    for (const SweepPoint& p : r.points) {
      falls += p.outcome.kind == Outcome::Kind::kFall;
      invalid += !p.outcome.valid();
    }
    // Keep stdout a clean table when the table itself goes there.
    std::ostream& summary = config.out.empty() ? err : out;
    summary << r.points.size() << " points, " << falls << " falls, " << invalid << " invalid\n";
    return invalid > 0 ? kExitError : kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_bisect(const BisectConfig& config, std::ostream& out, std::ostream& err) {
  try {
    ScenarioSource source = load_source(config.scenario);
    BifurcationInterval b =
        localize_bifurcation(source.spec, config.path, config.lo, config.hi, config.tol);
    std::ostringstream text;
    text << header_lines(file_header(source, 0), "partrace bisect");
    text << "# path: " << b.path << " [" << path_unit(b.path) << "]\n";
    text << "# tol: " << format_double(config.tol) << "\n";
    text << "# simulations: " << b.simulations << "\n";
    text << "# columns: end\tvalue\toutcome\toutcome_t\n";
    text << "lo\t" << format_double(b.lo) << "\t" << outcome_label(b.outcome_lo.kind) << "\t"
         << format_double(b.outcome_lo.t) << "\n";
    text << "hi\t" << format_double(b.hi) << "\t" << outcome_label(b.outcome_hi.kind) << "\t"
         << format_double(b.outcome_hi.t) << "\n";
    if (!config.out.empty()) {
      ensure_dir(config.out);
      write_file(config.out / "bisect.tsv", text.str());
    }
    out << text.str();
    return kExitOk;
  } catch (const NoBracketError& e) {
    err << e.what() << "\n";
    return kExitNoBracket;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace partrace
