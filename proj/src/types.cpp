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

#include "tcfw/types.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tcfw {

namespace {

std::string format_config_error(const std::string& message, const std::string& field,
                                const std::string& file, int line) {
  std::ostringstream os;
  if (!file.empty()) {
    os << file;
    if (line > 0) os << ':' << line;
    os << ": ";
  }
  if (!field.empty()) os << "field '" << field << "': ";
  os << message;
  return os.str();
}

constexpr std::string_view kArgMetachars = "|&;<>()$`\\\"' \t\n\r*?[]#~{}!";

}  // namespace

const Value* ToolCallRequest::find_argument(std::string_view name) const {
  for (const auto& [key, value] : arguments) {
    if (key == name) return &value;
  }
  return nullptr;
}

bool ToolCallRequest::has_duplicate_arguments() const {
  std::set<std::string_view> seen;
  for (const auto& [key, value] : arguments) {
    if (!seen.insert(key).second) return true;
  }
  return false;
}

Decision max_decision(Decision a, Decision b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

Verdict Verdict::require_approval(RuleHit hit) {
  Verdict v;
  v.add(Decision::kRequireApproval, std::move(hit));
  return v;
}

Verdict Verdict::deny(RuleHit hit) {
  Verdict v;
  v.add(Decision::kDeny, std::move(hit));
  return v;
}

void Verdict::add(Decision at_least, RuleHit hit) {
  decision = max_decision(decision, at_least);
  rule_hits.push_back(std::move(hit));
}

void Verdict::merge(const Verdict& other) {
  decision = max_decision(decision, other.decision);
  rule_hits.insert(rule_hits.end(), other.rule_hits.begin(), other.rule_hits.end());
  if (other.sanitized_request) sanitized_request = other.sanitized_request;
}

bool Verdict::has_rule(std::string_view rule_id) const {
  return std::any_of(rule_hits.begin(), rule_hits.end(),
                     [&](const RuleHit& h) { return h.rule_id == rule_id; });
}

std::vector<std::string> Verdict::rule_ids() const {
  std::vector<std::string> ids;
  ids.reserve(rule_hits.size());
  for (const auto& h : rule_hits) ids.push_back(h.rule_id);
  return ids;
}

const ParamSpec* ToolSpec::find_parameter(std::string_view param) const {
  for (const auto& p : parameters) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

std::string ToolSpec::subject() const {
  if (!subject_argument.empty()) return subject_argument;
  switch (capability) {
    case Capability::kTerminal:
      return "command";
    case Capability::kFileRead:
    case Capability::kFileWrite:
      return "path";
    case Capability::kWebFetch:
      return "url";
    case Capability::kWebSearch:
      return "query";
    case Capability::kRender:
      return "content";
    case Capability::kOther:
      break;
  }
  return {};
}

ToolCatalog::ToolCatalog(std::vector<ToolSpec> tools) {
  for (auto& t : tools) {
    if (t.name.empty()) throw ConfigError("tool name must be non-empty", "tools.name");
    std::set<std::string> params;
    for (const auto& p : t.parameters) {
      if (!params.insert(p.name).second) {
        throw ConfigError("duplicate parameter '" + p.name + "' in tool '" + t.name + "'",
                          "tools.parameters");
      }
    }
    std::string name = t.name;
    if (!tools_.emplace(name, std::move(t)).second) {
      throw ConfigError("duplicate tool name '" + name + "'", "tools.name");
    }
  }
}

const ToolSpec* ToolCatalog::find(std::string_view name) const {
  auto it = tools_.find(name);
  return it == tools_.end() ? nullptr : &it->second;
}

AllowlistEntry AllowlistEntry::parse(std::string_view text) {
  AllowlistEntry entry;
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\t') {
      if (!current.empty()) words.push_back(std::exchange(current, {}));
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(current);
  if (words.empty()) throw Error("allowlist entry is empty");

  entry.command = words.front();
  if (entry.command.find_first_of("/\\") != std::string::npos ||
      entry.command.find_first_of(kArgMetachars) != std::string::npos) {
    throw Error("allowlist command must be a bare command name: '" + entry.command + "'");
  }
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (words[i].find_first_of(kArgMetachars) != std::string::npos) {
      throw Error("allowlist argument contains a shell metacharacter: '" + words[i] + "'");
    }
    entry.arg_prefix.push_back(words[i]);
  }
  return entry;
}

std::string AllowlistEntry::to_string() const {
  std::string s = command;
  for (const auto& a : arg_prefix) {
    s += ' ';
    s += a;
  }
  return s;
}

SecretPattern SecretPattern::make(std::string name, std::string pattern, Decision action) {
  SecretPattern p;
  p.name = std::move(name);
  p.pattern = std::move(pattern);
  p.action = action;
  try {
    p.compiled = std::regex(p.pattern, std::regex::ECMAScript | std::regex::optimize);
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid secret pattern '" + p.name + "': " + e.what(), "secret_patterns");
  }
  return p;
}

std::vector<std::string> PolicyConfig::default_protected_paths() {
  return {".vscode/settings.json", ".vscode/tasks.json", "**/mcp.json", ".cursor/**",
          ".clinerules*",          "**/*.rules",         ".agent/memory*"};
}

std::vector<SecretPattern> PolicyConfig::default_secret_patterns() {
  return {
      SecretPattern::make("openai_api_key", "sk-[A-Za-z0-9_-]{16,}"),
      SecretPattern::make("aws_access_key_id", "AKIA[0-9A-Z]{16}"),
      SecretPattern::make("pem_private_key", "-----BEGIN[A-Z0-9 ]*PRIVATE KEY"),
  };
}

std::vector<std::string> PolicyConfig::default_strip_fields() {
  return {"requires_approval", "require_approval", "auto_approve", "safe"};
}

void PolicyConfig::validate() const {
  const auto& root = workspace_root;
  if (root.empty() || root.front() != '/') {
    throw ConfigError("workspace_root must be an absolute POSIX path", "workspace_root");
  }
  if (root.size() > 1 && root.back() == '/') {
    throw ConfigError("workspace_root must not end with a separator", "workspace_root");
  }
  std::size_t start = 1;
  while (start <= root.size()) {
    auto end = root.find('/', start);
    if (end == std::string::npos) end = root.size();
    auto seg = std::string_view(root).substr(start, end - start);
    if (root.size() > 1 && (seg.empty() || seg == "." || seg == "..")) {
      throw ConfigError("workspace_root must be canonical (no empty, '.' or '..' segments)",
                        "workspace_root");
    }
    start = end + 1;
  }
  for (const auto& e : command_allowlist) {
    if (e.command.empty()) throw ConfigError("empty allowlist entry", "command_allowlist");
  }
  for (const auto& e : command_denylist) {
    if (e.command.empty()) throw ConfigError("empty denylist entry", "command_denylist");
  }
  if (max_query_param_length == 0) {
    throw ConfigError("must be positive", "max_query_param_length");
  }
  if (entropy_min_length == 0) throw ConfigError("must be positive", "entropy_min_length");
}

ConfigError::ConfigError(std::string message, std::string field, std::string file, int line)
    : Error(format_config_error(message, field, file, line)),
      message_(std::move(message)),
      field_(std::move(field)),
      file_(std::move(file)),
      line_(line) {}

// ---------------------------------------------------------------------------

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::pair<E, std::string_view> (&table)[N], std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E e) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "unknown";
}

constexpr std::pair<Decision, std::string_view> kDecisions[] = {
    {Decision::kAllow, "allow"},
    {Decision::kRequireApproval, "require_approval"},
    {Decision::kDeny, "deny"},
};

constexpr std::pair<OriginKind, std::string_view> kOrigins[] = {
    {OriginKind::kUserTurn, "user_turn"},
    {OriginKind::kWorkspaceFile, "workspace_file"},
    {OriginKind::kDirectoryListing, "directory_listing"},
    {OriginKind::kWebResource, "web_resource"},
    {OriginKind::kToolDescription, "tool_description"},
    {OriginKind::kRuleFile, "rule_file"},
    {OriginKind::kMemory, "memory"},
    {OriginKind::kUnknown, "unknown"},
};

constexpr std::pair<Capability, std::string_view> kCapabilities[] = {
    {Capability::kFileRead, "file_read"},   {Capability::kFileWrite, "file_write"},
    {Capability::kTerminal, "terminal"},    {Capability::kWebFetch, "web_fetch"},
    {Capability::kWebSearch, "web_search"}, {Capability::kRender, "render"},
    {Capability::kOther, "other"},
};

constexpr std::pair<ParamKind, std::string_view> kParamKinds[] = {
    {ParamKind::kString, "string"},
    {ParamKind::kInteger, "integer"},
    {ParamKind::kBoolean, "boolean"},
    {ParamKind::kList, "list"},
};

constexpr std::pair<ApprovalMode, std::string_view> kApprovalModes[] = {
    {ApprovalMode::kAlwaysAsk, "always_ask"},
    {ApprovalMode::kAutoApprove, "auto_approve"},
};

constexpr std::pair<OutsidePolicy, std::string_view> kOutsidePolicies[] = {
    {OutsidePolicy::kDeny, "deny"},
    {OutsidePolicy::kRequireApproval, "require_approval"},
};

constexpr std::pair<ShellDialect, std::string_view> kDialects[] = {
    {ShellDialect::kPosix, "posix"},
    {ShellDialect::kCmd, "cmd"},
    {ShellDialect::kPowerShell, "powershell"},
};

}  // namespace

std::string_view to_string(Decision d) { return name_of(kDecisions, d); }
std::string_view to_string(OriginKind k) { return name_of(kOrigins, k); }
std::string_view to_string(Capability c) { return name_of(kCapabilities, c); }
std::string_view to_string(ParamKind k) { return name_of(kParamKinds, k); }
std::string_view to_string(ApprovalMode m) { return name_of(kApprovalModes, m); }
std::string_view to_string(OutsidePolicy p) { return name_of(kOutsidePolicies, p); }
std::string_view to_string(ShellDialect d) { return name_of(kDialects, d); }

std::optional<Decision> parse_decision(std::string_view s) { return lookup(kDecisions, s); }
std::optional<OriginKind> parse_origin_kind(std::string_view s) { return lookup(kOrigins, s); }
std::optional<Capability> parse_capability(std::string_view s) {
  return lookup(kCapabilities, s);
}
std::optional<ParamKind> parse_param_kind(std::string_view s) { return lookup(kParamKinds, s); }
std::optional<ApprovalMode> parse_approval_mode(std::string_view s) {
  return lookup(kApprovalModes, s);
}
std::optional<OutsidePolicy> parse_outside_policy(std::string_view s) {
  return lookup(kOutsidePolicies, s);
}
std::optional<ShellDialect> parse_shell_dialect(std::string_view s) {
  return lookup(kDialects, s);
}

}  // namespace tcfw
