// Copyright 2026 The tcfw Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "tcfw/shell.hpp"
#include "tcfw/types.hpp"

namespace tcfw::allowlist {

enum class Coverage { kCovered, kNotCovered };

// Allowlist matching works on the executed command word, never on substrings
// of the command line. A command is covered only when argv[0] (by basename
// unless strict_argv0) equals an entry's command, its arguments start with
// the entry's prefix, no word carries an unresolved expansion or glob, and no
// redirection touches a file.
Coverage match_simple(const shell::SimpleCommand& cmd, std::span<const AllowlistEntry> entries,
                      bool strict_argv0 = false);

// Why a command is not covered; nullopt when it is.
std::optional<std::string> uncovered_reason(const shell::SimpleCommand& cmd,
                                            std::span<const AllowlistEntry> entries,
                                            bool strict_argv0 = false);

// Denylist matching is lenient: basename of argv[0] always, expansions in
// later arguments do not prevent a match.
const AllowlistEntry* denylist_match(const shell::SimpleCommand& cmd,
                                     std::span<const AllowlistEntry> entries);

std::string_view basename(std::string_view argv0);

class AnalysisMismatch : public Error {
 public:
  AnalysisMismatch() : Error("analysis source does not match the command argument") {}
};

Verdict evaluate_command_line(const shell::CommandAnalysis& analysis, const PolicyConfig& config);

// Same, after checking that `analysis` was produced from `command_argument`.
// Throws AnalysisMismatch otherwise.
Verdict evaluate_command_line(const shell::CommandAnalysis& analysis,
                              std::string_view command_argument, const PolicyConfig& config);

// Analyze-and-evaluate entry point used by the pipeline. Handles dialect and
// size limits.
Verdict evaluate_command(std::string_view command_line, const PolicyConfig& config);

}  // namespace tcfw::allowlist
