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

// Trace records and their on-disk form. See docs/trace_format.md.

#ifndef PARTRACE_TRACE_H_
#define PARTRACE_TRACE_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "partrace/simulator.h"

namespace partrace {

struct Outcome {
  enum class Kind { kSuccess, kFall, kCollision, kTimeout, kInvalid };
  Kind kind = Kind::kTimeout;
  double t = 0.0;      // fall, collision and invalid only
  std::string pair_a;  // collision only
  std::string pair_b;
  std::string reason;  // invalid only
  friend bool operator==(const Outcome&, const Outcome&) = default;

  static Outcome success() { return {Kind::kSuccess, 0.0, "", "", ""}; }
  static Outcome timeout() { return {Kind::kTimeout, 0.0, "", "", ""}; }
  static Outcome fall(double t) { return {Kind::kFall, t, "", "", ""}; }
  static Outcome collision(double t, std::string a, std::string b) {
    return {Kind::kCollision, t, std::move(a), std::move(b), ""};
  }
  static Outcome invalid(std::string reason, double t) {
    return {Kind::kInvalid, t, "", "", std::move(reason)};
  }
  bool valid() const { return kind != Kind::kInvalid; }
};

// "success", "fall", "collision", "timeout", "invalid".
const char* outcome_label(Outcome::Kind kind);
Outcome::Kind parse_outcome_label(std::string_view label);

struct TelemetryRow {
  double t = 0.0;
  std::vector<double> q;
  std::vector<double> qdot;
  friend bool operator==(const TelemetryRow&, const TelemetryRow&) = default;
};

struct Trace {
  int particle_index = 0;
  uint64_t seed = 0;
  std::vector<std::string> coordinates;
  std::vector<std::string> coordinate_units;  // "m" or "rad" per coordinate
  std::vector<TelemetryRow> telemetry;
  std::vector<ContactEvent> events;
  Outcome outcome;
  double wall_time = 0.0;  // not serialized with the trace (see timing file)
};

// Field equality ignoring wall_time.
bool same_record(const Trace& a, const Trace& b);

// Provenance written into every file header.
struct FileHeader {
  std::string tool_version;
  uint64_t master_seed = 0;
  std::string scenario_name;
  std::string scenario_digest;  // SHA-256 hex of the scenario file bytes
  friend bool operator==(const FileHeader&, const FileHeader&) = default;
};

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(const std::string& message, size_t offset)
      : std::runtime_error(message + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

// Shortest decimal that parses back to exactly `v`.
std::string format_double(double v);

std::string telemetry_text(const Trace& trace, const FileHeader& header);
std::string events_text(const Trace& trace, const FileHeader& header);

// Parses the two files of one trace. Throws TraceFormatError on any
// malformed or truncated input. `header` receives the telemetry header.
Trace parse_trace(std::string_view telemetry, std::string_view events, FileHeader* header = nullptr);

// <dir>/trace_<index>.telemetry.tsv and <dir>/trace_<index>.events.tsv,
// index zero-padded to 6 digits.
std::filesystem::path telemetry_path(const std::filesystem::path& dir, int index);
std::filesystem::path events_path(const std::filesystem::path& dir, int index);

void write_trace(const Trace& trace, const FileHeader& header, const std::filesystem::path& dir);
Trace read_trace(const std::filesystem::path& dir, int index, FileHeader* header = nullptr);

// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial files.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace partrace

#endif  // PARTRACE_TRACE_H_
