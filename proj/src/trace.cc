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

#include "partrace/trace.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace partrace {
namespace {

constexpr std::string_view kTelemetryMagic = "# partrace telemetry";
constexpr std::string_view kEventsMagic = "# partrace events";

std::string clean(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void put_header(std::ostringstream& out, std::string_view magic, const Trace& trace,
                const FileHeader& header) {
  out << magic << "\n";
  out << "# tool_version: " << header.tool_version << "\n";
  out << "# master_seed: " << header.master_seed << "\n";
  out << "# scenario: " << clean(header.scenario_name) << "\n";
  out << "# scenario_sha256: " << header.scenario_digest << "\n";
  out << "# particle: " << trace.particle_index << "\n";
  out << "# particle_seed: " << trace.seed << "\n";
}

std::string rate_unit(const std::string& unit) { return unit + "/s"; }

// Line-oriented reader that knows its byte offset for error reports.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  size_t offset() const { return line_start_; }

  std::string_view line() {
    if (done()) throw TraceFormatError("unexpected end of file", pos_);
    line_start_ = pos_;
    size_t nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) {
      throw TraceFormatError("unterminated last line (truncated file?)", pos_);
    }
    std::string_view out = text_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return out;
  }

  std::string_view field(std::string_view key) {
    std::string_view l = line();
    std::string prefix = "# " + std::string(key) + ": ";
    if (l.substr(0, prefix.size()) != prefix) {
      throw TraceFormatError("expected header '" + std::string(key) + "'", line_start_);
    }
    return l.substr(prefix.size());
  }

  [[noreturn]] void fail(const std::string& what, size_t column = 0) const {
    throw TraceFormatError(what, line_start_ + column);
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  size_t line_start_ = 0;
};

std::vector<std::pair<std::string_view, size_t>> split_tabs(std::string_view line) {
  std::vector<std::pair<std::string_view, size_t>> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start), start);
      return out;
    }
    out.emplace_back(line.substr(start, tab - start), start);
    start = tab + 1;
  }
}

double parse_double(const Reader& r, std::string_view s, size_t column) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    r.fail("bad number '" + std::string(s) + "'", column);
  }
  return v;
}

template <typename Int>
Int parse_int(const Reader& r, std::string_view s, size_t column = 0) {
  Int v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    r.fail("bad integer '" + std::string(s) + "'", column);
  }
  return v;
}

void read_header(Reader& r, std::string_view magic, Trace& trace, FileHeader& header) {
  if (r.line() != magic) r.fail("missing '" + std::string(magic) + "' line");
  header.tool_version = std::string(r.field("tool_version"));
  header.master_seed = parse_int<uint64_t>(r, r.field("master_seed"));
  header.scenario_name = std::string(r.field("scenario"));
  header.scenario_digest = std::string(r.field("scenario_sha256"));
  trace.particle_index = parse_int<int>(r, r.field("particle"));
  trace.seed = parse_int<uint64_t>(r, r.field("particle_seed"));
}

}  // namespace

const char* outcome_label(Outcome::Kind kind) {
  switch (kind) {
    case Outcome::Kind::kSuccess:
      return "success";
    case Outcome::Kind::kFall:
      return "fall";
    case Outcome::Kind::kCollision:
      return "collision";
    case Outcome::Kind::kTimeout:
      return "timeout";
    case Outcome::Kind::kInvalid:
      return "invalid";
  }
  return "unknown";
}

Outcome::Kind parse_outcome_label(std::string_view label) {
  for (auto k : {Outcome::Kind::kSuccess, Outcome::Kind::kFall, Outcome::Kind::kCollision,
                 Outcome::Kind::kTimeout, Outcome::Kind::kInvalid}) {
    if (label == outcome_label(k)) return k;
  }
  throw std::invalid_argument("unknown outcome '" + std::string(label) + "'");
}

bool same_record(const Trace& a, const Trace& b) {
  return a.particle_index == b.particle_index && a.seed == b.seed &&
         a.coordinates == b.coordinates && a.coordinate_units == b.coordinate_units &&
         a.telemetry == b.telemetry && a.events == b.events && a.outcome == b.outcome;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string telemetry_text(const Trace& trace, const FileHeader& header) {
  std::ostringstream out;
  put_header(out, kTelemetryMagic, trace, header);
  out << "# columns: t";
  for (const auto& c : trace.coordinates) out << "\tq:" << c;
  for (const auto& c : trace.coordinates) out << "\tqdot:" << c;
  out << "\n# units: s";
  for (const auto& u : trace.coordinate_units) out << "\t" << u;
  for (const auto& u : trace.coordinate_units) out << "\t" << rate_unit(u);
  out << "\n";
  for (const TelemetryRow& row : trace.telemetry) {
    out << format_double(row.t);
    for (double v : row.q) out << "\t" << format_double(v);
    for (double v : row.qdot) out << "\t" << format_double(v);
    out << "\n";
  }
  out << "# end: " << trace.telemetry.size() << "\n";
  return out.str();
}

std::string events_text(const Trace& trace, const FileHeader& header) {
  std::ostringstream out;
  put_header(out, kEventsMagic, trace, header);
  const Outcome& o = trace.outcome;
  out << "# outcome: " << outcome_label(o.kind) << "\t" << format_double(o.t) << "\t" << o.pair_a
      << "\t" << o.pair_b << "\t" << clean(o.reason) << "\n";
  out << "# columns: t\tkind\tpair_a\tpair_b\tx\ty\tnormal_impulse\n";
  out << "# units: s\t-\t-\t-\tm\tm\tN*s\n";
  for (const ContactEvent& e : trace.events) {
    out << format_double(e.t) << "\t" << event_kind_name(e.kind) << "\t" << e.pair_a << "\t"
        << e.pair_b << "\t" << format_double(e.point.x) << "\t" << format_double(e.point.y) << "\t"
        << format_double(e.normal_impulse) << "\n";
  }
  out << "# end: " << trace.events.size() << "\n";
  return out.str();
}

Trace parse_trace(std::string_view telemetry, std::string_view events, FileHeader* header_out) {
  Trace trace;
  FileHeader header;
  {
    Reader r(telemetry);
    read_header(r, kTelemetryMagic, trace, header);
    auto columns = split_tabs(r.field("columns"));
    if (columns.empty() || columns[0].first != "t" || columns.size() % 2 == 0) {
      r.fail("bad column list");
    }
    const size_t n = (columns.size() - 1) / 2;
    for (size_t i = 0; i < n; ++i) {
      std::string_view q = columns[1 + i].first, qd = columns[1 + n + i].first;
      if (q.substr(0, 2) != "q:" || qd.substr(0, 5) != "qdot:" || q.substr(2) != qd.substr(5)) {
        r.fail("bad column '" + std::string(q) + "'", columns[1 + i].second);
      }
      trace.coordinates.emplace_back(q.substr(2));
    }
    auto units = split_tabs(r.field("units"));
    if (units.size() != columns.size()) r.fail("unit count does not match columns");
    for (size_t i = 0; i < n; ++i) trace.coordinate_units.emplace_back(units[1 + i].first);
    while (true) {
      std::string_view l = r.line();
      if (l.substr(0, 2) == "# ") {
        // Must be the end marker; re-parse it as such.
        if (l.substr(0, 7) != "# end: ") r.fail("unexpected comment line");
        size_t count = parse_int<size_t>(r, l.substr(7), 7);
        if (!r.done()) r.fail("data after end marker");
        if (count != trace.telemetry.size()) r.fail("row count does not match end marker");
        break;
      }
      auto cells = split_tabs(l);
      if (cells.size() != columns.size()) r.fail("wrong number of columns");
      TelemetryRow row;
      row.t = parse_double(r, cells[0].first, cells[0].second);
      for (size_t i = 0; i < n; ++i) {
        row.q.push_back(parse_double(r, cells[1 + i].first, cells[1 + i].second));
      }
      for (size_t i = 0; i < n; ++i) {
        row.qdot.push_back(parse_double(r, cells[1 + n + i].first, cells[1 + n + i].second));
      }
      trace.telemetry.push_back(std::move(row));
    }
  }
  {
    Reader r(events);
    Trace other;
    FileHeader other_header;
    read_header(r, kEventsMagic, other, other_header);
    if (other_header != header || other.particle_index != trace.particle_index ||
        other.seed != trace.seed) {
      r.fail("events header does not match telemetry header");
    }
    auto outcome = split_tabs(r.field("outcome"));
    if (outcome.size() != 5) r.fail("bad outcome line");
    try {
      trace.outcome.kind = parse_outcome_label(outcome[0].first);
    } catch (const std::invalid_argument& e) {
      r.fail(e.what());
    }
    trace.outcome.t = parse_double(r, outcome[1].first, outcome[1].second);
    trace.outcome.pair_a = std::string(outcome[2].first);
    trace.outcome.pair_b = std::string(outcome[3].first);
    trace.outcome.reason = std::string(outcome[4].first);
    if (r.field("columns") != "t\tkind\tpair_a\tpair_b\tx\ty\tnormal_impulse") {
      r.fail("unexpected event columns");
    }
    r.field("units");
    while (true) {
      std::string_view l = r.line();
      if (l.substr(0, 2) == "# ") {
        if (l.substr(0, 7) != "# end: ") r.fail("unexpected comment line");
        size_t count = parse_int<size_t>(r, l.substr(7), 7);
        if (!r.done()) r.fail("data after end marker");
        if (count != trace.events.size()) r.fail("row count does not match end marker");
        break;
      }
      auto cells = split_tabs(l);
      if (cells.size() != 7) r.fail("wrong number of columns");
      ContactEvent e;
      e.t = parse_double(r, cells[0].first, cells[0].second);
      try {
        e.kind = parse_event_kind(std::string(cells[1].first));
      } catch (const std::invalid_argument& err) {
        r.fail(err.what(), cells[1].second);
      }
      e.pair_a = std::string(cells[2].first);
      e.pair_b = std::string(cells[3].first);
      e.point.x = parse_double(r, cells[4].first, cells[4].second);
      e.point.y = parse_double(r, cells[5].first, cells[5].second);
      e.normal_impulse = parse_double(r, cells[6].first, cells[6].second);
      trace.events.push_back(std::move(e));
    }
  }
  if (header_out) *header_out = header;
  return trace;
}

std::filesystem::path telemetry_path(const std::filesystem::path& dir, int index) {
  char name[64];
  std::snprintf(name, sizeof(name), "trace_%06d.telemetry.tsv", index);
  return dir / name;
}

std::filesystem::path events_path(const std::filesystem::path& dir, int index) {
  char name[64];
  std::snprintf(name, sizeof(name), "trace_%06d.events.tsv", index);
  return dir / name;
}

void write_trace(const Trace& trace, const FileHeader& header, const std::filesystem::path& dir) {
  write_file(telemetry_path(dir, trace.particle_index), telemetry_text(trace, header));
  write_file(events_path(dir, trace.particle_index), events_text(trace, header));
}

Trace read_trace(const std::filesystem::path& dir, int index, FileHeader* header) {
  std::string t = read_file(telemetry_path(dir, index));
  std::string e = read_file(events_path(dir, index));
  return parse_trace(t, e, header);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace partrace
