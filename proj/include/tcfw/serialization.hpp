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

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "tcfw/paths.hpp"
#include "tcfw/types.hpp"

namespace tcfw {

// A parsed JSON document that remembers where each member started, so
// semantic errors can name a line.
struct JsonDocument {
  Value value;
  std::string file;
  // JSON pointer -> 1-based line.
  std::map<std::string, int> lines;
  // Pointers of object members that appeared more than once.
  std::set<std::string> duplicates;

  // Line of `pointer`, or of its nearest recorded ancestor.
  int line_of(const std::string& pointer) const;
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;
};

std::string pointer_escape(std::string_view key);

// Throws ConfigError naming file and line on syntax errors.
JsonDocument parse_json_document(std::string_view text, const std::string& file = "<input>");
JsonDocument read_json_file(const std::string& path);

// Unknown fields, duplicate keys, wrong types and invariant violations all
// throw ConfigError(file, line, field).
PolicyConfig policy_config_from_json(const JsonDocument& doc);
PolicyConfig load_policy_config(const std::string& path);
Value policy_config_to_json(const PolicyConfig& config);
// Stable hex digest of the normalized policy.
std::string policy_digest(const PolicyConfig& config, const ToolCatalog& catalog);

ToolCatalog catalog_from_json(const JsonDocument& doc);
ToolCatalog load_catalog(const std::string& path);
Value catalog_to_json(const ToolCatalog& catalog);

class WireError : public Error {
 public:
  WireError(const std::string& message, std::string field) : Error(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Wire shape: {session_id?, tool_name, arguments{}, origin{kind,detail}?,
// raw_model_fields{}?}. Duplicate argument keys are preserved so the
// pipeline can reject them. Throws WireError.
ToolCallRequest request_from_json(const JsonDocument& doc, const std::string& base = "");
ToolCallRequest request_from_json(const Value& value);
Value request_to_json(const ToolCallRequest& request);
// Wire text for `request`; unlike request_to_json it keeps repeated argument
// keys.
std::string request_to_wire(const ToolCallRequest& request);

Value verdict_to_json(const Verdict& verdict);
Verdict verdict_from_json(const Value& value);

// {"entries": {path: "file" | "dir" | {"kind": "symlink", "target": ...}},
//  "home": ..., "cwd": ..., "env": {...}}
paths::HostContext host_from_fixture(const Value& fixture);

}  // namespace tcfw
