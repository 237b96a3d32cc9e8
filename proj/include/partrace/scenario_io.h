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

// Scenario documents are JSON; docs/scenario_format.md describes every key.

#ifndef PARTRACE_SCENARIO_IO_H_
#define PARTRACE_SCENARIO_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "partrace/model.h"

namespace partrace {

// Parses and validates. Throws ScenarioError; parse errors carry the 1-based
// line and column of the offending byte.
ScenarioSpec load_scenario(std::string_view text);

// Reads the file and calls load_scenario(). `bytes`, when non-null, receives
// the raw file contents (the run manifest digests them).
ScenarioSpec load_scenario_file(const std::filesystem::path& path, std::string* bytes = nullptr);

// Canonical form: keys sorted, two-space indent, shortest round-trip doubles,
// trailing newline. load_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const ScenarioSpec& spec);

// Path of a bundled scenario ("rimless_wheel" -> <scenario dir>/rimless_wheel.json).
std::filesystem::path bundled_scenario_path(const std::string& name);

}  // namespace partrace

#endif  // PARTRACE_SCENARIO_IO_H_
