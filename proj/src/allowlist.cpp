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

#include "tcfw/allowlist.hpp"

#include <algorithm>

#include "tcfw/rules.hpp"

namespace tcfw::allowlist {

namespace {

bool prefix_matches(const shell::SimpleCommand& cmd, const AllowlistEntry& entry) {
  if (cmd.argv.size() < entry.arg_prefix.size() + 1) return false;
  for (std::size_t i = 0; i < entry.arg_prefix.size(); ++i) {
    if (cmd.argv[i + 1].text != entry.arg_prefix[i]) return false;
  }
  return true;
}

}  // namespace

std::string_view basename(std::string_view argv0) {
  auto slash = argv0.find_last_of('/');
  return slash == std::string_view::npos ? argv0 : argv0.substr(slash + 1);
}

std::optional<std::string> uncovered_reason(const shell::SimpleCommand& cmd,
                                            std::span<const AllowlistEntry> entries,
                                            bool strict_argv0) {
  if (cmd.argv.empty()) {
    return cmd.redirections.empty() ? "assignment-only command" : "redirection-only command";
  }
  std::string_view name = cmd.argv.front().text;
  if (!strict_argv0) name = basename(name);
  bool listed = std::any_of(entries.begin(), entries.end(),
                            [&](const AllowlistEntry& e) { return e.command == name && prefix_matches(cmd, e); });
  if (!listed) return "command '" + cmd.argv.front().text + "' is not on the allowlist";
  for (const auto& w : cmd.argv) {
    if (w.has_substitution) return "word '" + w.text + "' contains an unresolved substitution";
    if (w.has_glob) return "word '" + w.text + "' contains a glob pattern";
    if (w.has_brace) return "word '" + w.text + "' contains a brace expansion";
    if (w.opaque) return "word '" + w.text + "' could not be resolved";
  }
  for (const auto& r : cmd.redirections) {
    if (!r.is_benign()) return "redirection '" + r.op + r.target.text + "' touches a file";
  }
  return std::nullopt;
}

Coverage match_simple(const shell::SimpleCommand& cmd, std::span<const AllowlistEntry> entries,
                      bool strict_argv0) {
  return uncovered_reason(cmd, entries, strict_argv0) ? Coverage::kNotCovered : Coverage::kCovered;
}

const AllowlistEntry* denylist_match(const shell::SimpleCommand& cmd,
                                     std::span<const AllowlistEntry> entries) {
  if (cmd.argv.empty() || !cmd.argv.front().resolved()) return nullptr;
  std::string_view name = basename(cmd.argv.front().text);
  for (const auto& e : entries) {
    if (e.command == name && prefix_matches(cmd, e)) return &e;
  }
  return nullptr;
}

Verdict evaluate_command_line(const shell::CommandAnalysis& analysis, const PolicyConfig& config) {
  Verdict verdict;
  auto commands = shell::flatten_commands(analysis);

  for (const auto& cmd : commands) {
    if (const auto* entry = denylist_match(cmd, config.command_denylist)) {
      verdict.add(Decision::kDeny, {std::string(rules::kShellDenylist),
                                    "command matches denylist entry '" + entry->to_string() + "'",
                                    cmd.display()});
    }
  }
  if (verdict.decision == Decision::kDeny) return verdict;

  Verdict blocked;
  if (config.command_allowlist.empty()) {
    blocked.add(Decision::kRequireApproval,
                {std::string(rules::kShellEmptyAllowlist),
                 "no commands are allowlisted; every command requires approval", ""});
  }
  if (!analysis.parse_complete || analysis.has_residue()) {
    std::string evidence;
    if (auto residue = analysis.residue(); !residue.empty()) {
      evidence = analysis.source.substr(residue.front().begin, residue.front().size());
    } else if (!analysis.unparsed.empty()) {
      const auto& r = analysis.unparsed.front();
      evidence = analysis.source.substr(r.begin, r.size());
    }
    blocked.add(Decision::kRequireApproval,
                {std::string(rules::kShellUnparsed),
                 "command line contains constructs that were not fully analyzed", evidence});
  }
  for (const auto& cmd : commands) {
    if (auto reason = uncovered_reason(cmd, config.command_allowlist, config.strict_argv0)) {
      blocked.add(Decision::kRequireApproval,
                  {std::string(rules::kShellUncovered), *reason, cmd.display()});
    }
  }
  if (blocked.decision != Decision::kAllow) {
    for (auto c : analysis.categories.members()) {
      blocked.add(Decision::kRequireApproval,
                  {std::string(shell::rule_id(c)),
                   "command line uses " + std::string(shell::short_name(c)) + " metacharacters", ""});
    }
  }
  return blocked;
}

Verdict evaluate_command_line(const shell::CommandAnalysis& analysis,
                              std::string_view command_argument, const PolicyConfig& config) {
  if (analysis.source != command_argument) throw AnalysisMismatch();
  return evaluate_command_line(analysis, config);
}

Verdict evaluate_command(std::string_view command_line, const PolicyConfig& config) {
  if (config.shell_dialect != ShellDialect::kPosix) {
    return Verdict::require_approval({std::string(rules::kShellDialect),
                                      "command analysis only supports POSIX shells; dialect is " +
                                          std::string(to_string(config.shell_dialect)),
                                      ""});
  }
  try {
    auto analysis = shell::analyze(command_line);
    return evaluate_command_line(analysis, command_line, config);
  } catch (const shell::InputTooLarge& e) {
    return Verdict::deny({std::string(rules::kShellTooLarge), e.what(), ""});
  }
}

}  // namespace tcfw::allowlist
