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

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tcfw/types.hpp"

namespace tcfw {

enum class FinalDecision { kExecute, kReject };
enum class ApprovalAnswer { kApproved, kDenied };
enum class ApproverKind { kHuman, kPolicyAuto };

std::string_view to_string(FinalDecision d);
std::string_view to_string(ApprovalAnswer a);
std::string_view to_string(ApproverKind k);

// SHA-256 (hex) of tool_name plus arguments sorted by key. raw_model_fields,
// origin and session_id are not part of it.
std::string request_digest(const ToolCallRequest& request);

struct ApprovalRecord {
  std::string session_id;
  std::string digest;
  ApprovalAnswer decision = ApprovalAnswer::kDenied;
  std::chrono::system_clock::time_point timestamp;
  ApproverKind approver_kind = ApproverKind::kHuman;
};

class ApproverUnavailable : public Error {
 public:
  using Error::Error;
};

class Approver {
 public:
  virtual ~Approver() = default;
  // May throw ApproverUnavailable.
  virtual ApprovalAnswer ask(const ToolCallRequest& request, const Verdict& verdict) = 0;
};

// Answers from a fixed script; unavailable once the script runs out.
class ScriptedApprover : public Approver {
 public:
  explicit ScriptedApprover(std::vector<ApprovalAnswer> script);
  ApprovalAnswer ask(const ToolCallRequest& request, const Verdict& verdict) override;
  int calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<ApprovalAnswer> script_;
  std::size_t next_ = 0;
  int calls_ = 0;
};

// Prompts on a terminal stream; anything but y/yes denies, EOF is unavailable.
class TerminalApprover : public Approver {
 public:
  TerminalApprover(std::istream& in, std::ostream& out);
  ApprovalAnswer ask(const ToolCallRequest& request, const Verdict& verdict) override;

 private:
  std::mutex mu_;
  std::istream& in_;
  std::ostream& out_;
};

// Exact-digest approval cache, scoped to session lifetime.
class SessionStore {
 public:
  class Session {
   public:
    std::optional<ApprovalRecord> lookup(const std::string& digest) const;
    void record(ApprovalRecord r);

   private:
    friend class SessionStore;
    std::mutex mu_;
    std::map<std::string, ApprovalRecord> records_;
  };

  // Locks the session for the lifetime of the returned handle.
  class Lock {
   public:
    Session* operator->() { return session_; }

   private:
    friend class SessionStore;
    Lock(std::shared_ptr<Session> s) : keep_(std::move(s)), guard_(keep_->mu_), session_(keep_.get()) {}
    std::shared_ptr<Session> keep_;
    std::unique_lock<std::mutex> guard_;
    Session* session_;
  };

  Lock acquire(const std::string& session_id);
  void end_session(const std::string& session_id);
  std::size_t size(const std::string& session_id);

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

struct Finalization {
  FinalDecision decision = FinalDecision::kReject;
  // The evaluated rule hits plus APPROVAL.* hits added here.
  std::vector<RuleHit> audit_hits;
  std::optional<ApprovalRecord> record;
  bool cache_hit = false;
  std::string digest;
};

// Deny never executes. RequireApproval goes through the session cache, then
// the approver (nullptr means unavailable), unless approval_mode is
// AutoApprove.
Finalization finalize(const Verdict& verdict, const ToolCallRequest& request, const PolicyConfig& config,
                      Approver* approver, SessionStore& store);

}  // namespace tcfw
