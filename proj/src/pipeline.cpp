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


#include "tcfw/pipeline.hpp"

#include "tcfw/allowlist.hpp"
#include "tcfw/exfiltration.hpp"
#include "tcfw/rules.hpp"
#include "tcfw/validator.hpp"

namespace tcfw {

namespace {

Verdict schema_deny(const std::string& arg, const std::string& why) {
  return Verdict::deny({std::string(rules::kToolSchema), why, arg});
}

Verdict file_verdict(const ToolSpec& spec, const Value& subject, const PolicyConfig& config,
                     const paths::HostContext& host) {
  auto op = spec.capability == Capability::kFileWrite ? paths::Operation::kWrite : paths::Operation::kRead;
  Verdict v;
  auto one = [&](const std::string& p) { v.merge(paths::decide(op, p, config, host).second); };
  if (subject.is_string()) {
    one(subject.get<std::string>());
    return v;
  }
  // Multi-path tools: every element must be a path string.
  if (!subject.is_array() || subject.empty()) return schema_deny(spec.subject(), "path argument must be a string");
  for (const auto& e : subject) {
    if (!e.is_string()) return schema_deny(spec.subject(), "path list must contain only strings");
    one(e.get<std::string>());
  }
  return v;
}

Verdict dispatch(const ToolSpec& spec, ToolCallRequest& request, const PolicyConfig& config,
                 const paths::HostContext& host) {
  if (spec.capability == Capability::kOther) return {};
  const std::string name = spec.subject();
  const Value* subject = request.find_argument(name);
  if (!subject) return schema_deny(name, "missing subject argument '" + name + "'");
  if (spec.capability == Capability::kFileRead || spec.capability == Capability::kFileWrite) {
    return file_verdict(spec, *subject, config, host);
  }
  if (!subject->is_string()) return schema_deny(name, "subject argument '" + name + "' must be a string");
  const auto text = subject->get<std::string>();
  switch (spec.capability) {
    case Capability::kTerminal:
      return allowlist::evaluate_command(text, config);
    case Capability::kWebFetch:
      return exfil::inspect_url(text, config);
    case Capability::kWebSearch:
      return exfil::inspect_outbound_text(text, config);
    case Capability::kRender: {
      auto scan = exfil::scan_renderable(text, config.secret_patterns);
      Verdict v = exfil::render_verdict(scan.findings, config);
      for (auto& [k, value] : request.arguments) {
        if (k == name) value = scan.sanitized;
      }
      return v;
    }
    default:
      return {};
  }
}

}  // namespace

Verdict evaluate(const ToolCallRequest& request, const ToolCatalog& catalog, const PolicyConfig& config,
                 const paths::HostContext& host) {
  if (request.tool_name.empty()) {
    return Verdict::deny({std::string(rules::kCoreMalformed), "tool_name is empty", ""});
  }
  if (request.has_duplicate_arguments()) {
    return Verdict::deny({std::string(rules::kCoreMalformed), "duplicate argument keys", request.tool_name});
  }

  Verdict v = validate(request, catalog);
  if (v.decision == Decision::kDeny) return v;

  const ToolSpec& spec = *catalog.find(request.tool_name);
  auto sanitized = sanitize_untrusted_fields(request, config.strip_fields, &spec);
  for (auto& flag : sanitized.flags) v.add(Decision::kAllow, std::move(flag));

  ToolCallRequest out = std::move(sanitized.request);
  v.merge(dispatch(spec, out, config, host));

  if (spec.approval_required && v.decision == Decision::kAllow) {
    v.add(Decision::kRequireApproval, {std::string(rules::kToolApprovalRequired),
                                       "tool '" + spec.name + "' requires approval", spec.name});
  }
  v.sanitized_request = std::move(out);
  return v;
}

}  // namespace tcfw
