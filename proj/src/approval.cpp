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


#include "tcfw/approval.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "tcfw/rules.hpp"

namespace tcfw {

std::string_view to_string(FinalDecision d) { return d == FinalDecision::kExecute ? "execute" : "reject"; }
std::string_view to_string(ApprovalAnswer a) { return a == ApprovalAnswer::kApproved ? "approved" : "denied"; }
std::string_view to_string(ApproverKind k) { return k == ApproverKind::kHuman ? "human" : "policy_auto"; }

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

}  // namespace

std::string request_digest(const ToolCallRequest& request) {
  // nlohmann::json (not ordered_json) sorts nested object keys on parse.
  std::vector<std::pair<std::string, std::string>> args;
  for (const auto& [k, v] : request.arguments) args.emplace_back(k, nlohmann::json::parse(v.dump()).dump());
  std::sort(args.begin(), args.end());
  nlohmann::json canon = nlohmann::json::array();
  canon.push_back(request.tool_name);
  for (const auto& [k, v] : args) canon.push_back({k, nlohmann::json::parse(v)});
  return sha256_hex(canon.dump());
}

ScriptedApprover::ScriptedApprover(std::vector<ApprovalAnswer> script) : script_(std::move(script)) {}

ApprovalAnswer ScriptedApprover::ask(const ToolCallRequest&, const Verdict&) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (next_ >= script_.size()) throw ApproverUnavailable("approval script exhausted");
  return script_[next_++];
}

int ScriptedApprover::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

TerminalApprover::TerminalApprover(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

ApprovalAnswer TerminalApprover::ask(const ToolCallRequest& request, const Verdict& verdict) {
  std::lock_guard lock(mu_);
  out_ << "tool call needs approval: " << request.tool_name << '\n';
  for (const auto& [k, v] : request.arguments) out_ << "  " << k << " = " << v.dump() << '\n';
  for (const auto& h : verdict.rule_hits) out_ << "  [" << h.rule_id << "] " << h.message << '\n';
  out_ << "approve? [y/N] " << std::flush;
  std::string line;
  if (!std::getline(in_, line)) throw ApproverUnavailable("no terminal input");
  std::transform(line.begin(), line.end(), line.begin(), [](unsigned char c) { return std::tolower(c); });
  line.erase(0, line.find_first_not_of(" \t"));
  line.erase(line.find_last_not_of(" \t\r") + 1);
  return (line == "y" || line == "yes") ? ApprovalAnswer::kApproved : ApprovalAnswer::kDenied;
}

std::optional<ApprovalRecord> SessionStore::Session::lookup(const std::string& digest) const {
  auto it = records_.find(digest);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void SessionStore::Session::record(ApprovalRecord r) {
  auto digest = r.digest;
  records_.insert_or_assign(std::move(digest), std::move(r));
}

SessionStore::Lock SessionStore::acquire(const std::string& session_id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto& slot = sessions_[session_id];
    if (!slot) slot = std::make_shared<Session>();
    s = slot;
  }
  return Lock(std::move(s));
}

void SessionStore::end_session(const std::string& session_id) {
  std::lock_guard lock(mu_);
  sessions_.erase(session_id);
}

std::size_t SessionStore::size(const std::string& session_id) {
  return acquire(session_id)->records_.size();
}

Finalization finalize(const Verdict& verdict, const ToolCallRequest& request, const PolicyConfig& config,
                      Approver* approver, SessionStore& store) {
  Finalization out;
  out.audit_hits = verdict.rule_hits;
  const ToolCallRequest& subject = verdict.sanitized_request ? *verdict.sanitized_request : request;
  out.digest = request_digest(subject);

  switch (verdict.decision) {
    case Decision::kDeny:
      out.decision = FinalDecision::kReject;
      return out;
    case Decision::kAllow:
      out.decision = FinalDecision::kExecute;
      return out;
    case Decision::kRequireApproval:
      break;
  }

  if (config.approval_mode == ApprovalMode::kAutoApprove) {
    out.audit_hits.push_back({std::string(rules::kApprovalUnsafeMode),
                              "executed without user approval under auto_approve mode", out.digest});
    out.record = ApprovalRecord{request.session_id, out.digest, ApprovalAnswer::kApproved,
                                std::chrono::system_clock::now(), ApproverKind::kPolicyAuto};
    out.decision = FinalDecision::kExecute;
    return out;
  }

  auto session = store.acquire(request.session_id);
  if (auto cached = session->lookup(out.digest)) {
    out.cache_hit = true;
    out.record = cached;
    out.decision = cached->decision == ApprovalAnswer::kApproved ? FinalDecision::kExecute : FinalDecision::kReject;
    return out;
  }
  ApprovalAnswer answer;
  try {
    if (!approver) throw ApproverUnavailable("no approver configured");
    answer = approver->ask(subject, verdict);
  } catch (const ApproverUnavailable& e) {
    out.audit_hits.push_back({std::string(rules::kApprovalUnavailable), e.what(), out.digest});
    out.decision = FinalDecision::kReject;
    return out;
  }
  ApprovalRecord rec{request.session_id, out.digest, answer, std::chrono::system_clock::now(),
                     ApproverKind::kHuman};
  session->record(rec);
  out.record = rec;
  out.decision = answer == ApprovalAnswer::kApproved ? FinalDecision::kExecute : FinalDecision::kReject;
  return out;
}

}  // namespace tcfw
