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

#include "tcfw/validator.hpp"

#include <algorithm>
#include <set>

#include "tcfw/rules.hpp"

namespace tcfw {

namespace {

bool is_scalar(const Value& v) {
  return v.is_string() || v.is_boolean() || v.is_number_integer() || v.is_number_unsigned();
}

std::string value_text(const Value& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

bool value_matches(const Value& v, ParamKind kind) {
  switch (kind) {
    case ParamKind::kString: return v.is_string();
    case ParamKind::kInteger: return v.is_number_integer() || v.is_number_unsigned();
    case ParamKind::kBoolean: return v.is_boolean();
    case ParamKind::kList: return v.is_array() && std::all_of(v.begin(), v.end(), is_scalar);
  }
  return false;
}

Verdict validate(const ToolCallRequest& request, const ToolCatalog& catalog) {
  const ToolSpec* spec = catalog.find(request.tool_name);
  if (!spec) {
    return Verdict::deny({std::string(rules::kToolUnknown),
                          "tool '" + request.tool_name + "' is not in the catalog", request.tool_name});
  }
  if (!spec->enabled) {
    return Verdict::deny({std::string(rules::kToolDisabled),
                          "tool '" + request.tool_name + "' is disabled", request.tool_name});
  }

  Verdict v;
  std::set<std::string, std::less<>> seen;
  for (const auto& [name, value] : request.arguments) {
    seen.insert(name);
    const ParamSpec* p = spec->find_parameter(name);
    if (!p) {
      v.add(Decision::kDeny, {std::string(rules::kToolSchema),
                              "unknown parameter '" + name + "'", name});
    } else if (!value_matches(value, p->kind)) {
      v.add(Decision::kDeny, {std::string(rules::kToolSchema),
                              "parameter '" + name + "' must be " + std::string(to_string(p->kind)),
                              name});
    }
  }
  for (const auto& p : spec->parameters) {
    if (p.required && !seen.count(p.name)) {
      v.add(Decision::kDeny, {std::string(rules::kToolSchema),
                              "missing required parameter '" + p.name + "'", p.name});
    }
  }
  return v;
}

SanitizeResult sanitize_untrusted_fields(const ToolCallRequest& request,
                                         const std::vector<std::string>& strip_fields,
                                         const ToolSpec* spec) {
  SanitizeResult out;
  out.request = request;
  out.stripped = request.raw_model_fields;
  out.request.raw_model_fields.clear();

  auto in_strip_set = [&](const std::string& name) {
    return std::find(strip_fields.begin(), strip_fields.end(), name) != strip_fields.end();
  };
  Arguments kept;
  for (auto& [name, value] : out.request.arguments) {
    if (!in_strip_set(name)) {
      kept.emplace_back(name, std::move(value));
      continue;
    }
    if (spec && spec->find_parameter(name)) {
      out.flags.push_back({std::string(rules::kToolSuspectField),
                           "tool declares approval-like parameter '" + name + "'", name});
      kept.emplace_back(name, std::move(value));
    } else {
      out.stripped["argument:" + name] = value_text(value);
    }
  }
  out.request.arguments = std::move(kept);
  return out;
}

}  // namespace tcfw
