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

#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tcfw {

// Argument values keep the structure the model emitted (strings, integers,
// booleans, lists, and anything else so schema checks can reject it).
using Value = nlohmann::ordered_json;

// Ordered argument list. Duplicate keys are representable so that malformed
// requests can be detected instead of silently collapsed.
using Arguments = std::vector<std::pair<std::string, Value>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Request side

enum class OriginKind {
  kUserTurn,
  kWorkspaceFile,
  kDirectoryListing,
  kWebResource,
  kToolDescription,
  kRuleFile,
  kMemory,
  kUnknown,
};

struct ContentOrigin {
  OriginKind kind = OriginKind::kUnknown;
  std::string detail;

  bool operator==(const ContentOrigin&) const = default;
};

struct ToolCallRequest {
  std::string session_id;
  std::string tool_name;
  Arguments arguments;
  // Fields the model emitted beyond the declared schema. Recorded for audit,
  // never consulted for a decision.
  std::map<std::string, std::string> raw_model_fields;
  ContentOrigin origin;

  const Value* find_argument(std::string_view name) const;
  bool has_duplicate_arguments() const;

  bool operator==(const ToolCallRequest&) const = default;
};

// ---------------------------------------------------------------------------
// Verdicts

// Declaration order is severity order; merge takes the maximum.
enum class Decision { kAllow = 0, kRequireApproval = 1, kDeny = 2 };

struct RuleHit {
  std::string rule_id;
  std::string message;
  std::string evidence;

  bool operator==(const RuleHit&) const = default;
};

struct Verdict {
  Decision decision = Decision::kAllow;
  std::vector<RuleHit> rule_hits;
  std::optional<ToolCallRequest> sanitized_request;

  static Verdict allow() { return {}; }
  static Verdict require_approval(RuleHit hit);
  static Verdict deny(RuleHit hit);

  // Raises the decision to `at_least` and records the hit.
  void add(Decision at_least, RuleHit hit);
  // Max-severity merge; hits are concatenated in order.
  void merge(const Verdict& other);

  bool has_rule(std::string_view rule_id) const;
  std::vector<std::string> rule_ids() const;
};

Decision max_decision(Decision a, Decision b);

// ---------------------------------------------------------------------------
// Tool catalog

enum class Capability { kFileRead, kFileWrite, kTerminal, kWebFetch, kWebSearch, kRender, kOther };

enum class ParamKind { kString, kInteger, kBoolean, kList };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kString;
  bool required = false;
};

struct ToolSpec {
  std::string name;
  Capability capability = Capability::kOther;
  bool enabled = true;
  std::vector<ParamSpec> parameters;
  bool approval_required = false;
  // Argument carrying the operation subject (command line, path, URL,
  // renderable content). Empty means the capability default.
  std::string subject_argument;

  const ParamSpec* find_parameter(std::string_view name) const;
  std::string subject() const;
};

class ToolCatalog {
 public:
  ToolCatalog() = default;
  explicit ToolCatalog(std::vector<ToolSpec> tools);

  // Case-sensitive.
  const ToolSpec* find(std::string_view name) const;
  const std::map<std::string, ToolSpec, std::less<>>& tools() const { return tools_; }

 private:
  std::map<std::string, ToolSpec, std::less<>> tools_;
};

// ---------------------------------------------------------------------------
// Policy configuration

// There is intentionally no model-asserted approval mode.
enum class ApprovalMode { kAlwaysAsk, kAutoApprove };

enum class OutsidePolicy { kDeny, kRequireApproval };

enum class ShellDialect { kPosix, kCmd, kPowerShell };

struct AllowlistEntry {
  std::string command;
  std::vector<std::string> arg_prefix;

  // Parses "git init" style strings. Throws Error on invalid entries.
  static AllowlistEntry parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const AllowlistEntry&) const = default;
};

struct SecretPattern {
  std::string name;
  std::string pattern;
  Decision action = Decision::kDeny;
  std::regex compiled;

  static SecretPattern make(std::string name, std::string pattern, Decision action = Decision::kDeny);
};

struct PolicyConfig {
  std::string workspace_root;
  ApprovalMode approval_mode = ApprovalMode::kAlwaysAsk;
  std::vector<AllowlistEntry> command_allowlist;
  std::vector<AllowlistEntry> command_denylist;
  std::vector<std::string> protected_relative_paths = default_protected_paths();
  OutsidePolicy outside_read_policy = OutsidePolicy::kRequireApproval;
  OutsidePolicy outside_write_policy = OutsidePolicy::kDeny;
  std::vector<std::string> fetch_host_allowlist;
  std::vector<SecretPattern> secret_patterns = default_secret_patterns();
  std::size_t max_query_param_length = 256;

  bool strict_argv0 = false;
  ShellDialect shell_dialect = ShellDialect::kPosix;
  std::vector<std::string> strip_fields = default_strip_fields();
  bool entropy_heuristic = true;
  std::size_t entropy_min_length = 32;
  double entropy_bits_per_char = 4.0;

  static std::vector<std::string> default_protected_paths();
  static std::vector<SecretPattern> default_secret_patterns();
  static std::vector<std::string> default_strip_fields();

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string message, std::string field = {}, std::string file = {}, int line = 0);

  const std::string& message() const { return message_; }
  const std::string& field() const { return field_; }
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string message_;
  std::string field_;
  std::string file_;
  int line_;
};

// ---------------------------------------------------------------------------
// Enum names used on the wire and in reports.

std::string_view to_string(Decision d);
std::string_view to_string(OriginKind k);
std::string_view to_string(Capability c);
std::string_view to_string(ParamKind k);
std::string_view to_string(ApprovalMode m);
std::string_view to_string(OutsidePolicy p);
std::string_view to_string(ShellDialect d);

std::optional<Decision> parse_decision(std::string_view s);
std::optional<OriginKind> parse_origin_kind(std::string_view s);
std::optional<Capability> parse_capability(std::string_view s);
std::optional<ParamKind> parse_param_kind(std::string_view s);
std::optional<ApprovalMode> parse_approval_mode(std::string_view s);
std::optional<OutsidePolicy> parse_outside_policy(std::string_view s);
std::optional<ShellDialect> parse_shell_dialect(std::string_view s);

}  // namespace tcfw
