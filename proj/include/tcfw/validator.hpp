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
#include <string>
#include <vector>

#include "tcfw/types.hpp"

namespace tcfw {

// Catalog membership, enabled state and schema conformance. Never looks at
// raw_model_fields or origin.
Verdict validate(const ToolCallRequest& request, const ToolCatalog& catalog);

bool value_matches(const Value& v, ParamKind kind);

struct SanitizeResult {
  ToolCallRequest request;
  // Everything removed from the decision surface, for the audit trail.
  std::map<std::string, std::string> stripped;
  // TOOL.SUSPECT_FIELD hits for strip-set names the tool itself declares.
  std::vector<RuleHit> flags;
};

// Removes raw_model_fields and undeclared strip-set arguments. Idempotent.
SanitizeResult sanitize_untrusted_fields(const ToolCallRequest& request,
                                         const std::vector<std::string>& strip_fields,
                                         const ToolSpec* spec = nullptr);

}  // namespace tcfw
