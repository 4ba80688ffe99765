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


#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <thread>

#include "tcfw/approval.hpp"
#include "tcfw/pipeline.hpp"
#include "tcfw/rules.hpp"

namespace tcfw {
namespace {

using A = ApprovalAnswer;

ToolCallRequest req(std::string session, Arguments args, std::string tool = "execute_command") {
  ToolCallRequest r;
  r.session_id = std::move(session);
  r.tool_name = std::move(tool);
  r.arguments = std::move(args);
  return r;
}

Verdict needs_approval() { return Verdict::require_approval({"SHELL.UNCOVERED", "x", "rm"}); }

PolicyConfig config(ApprovalMode mode = ApprovalMode::kAlwaysAsk) {
  PolicyConfig c;
  c.workspace_root = "/ws";
  c.approval_mode = mode;
  c.command_allowlist.push_back(AllowlistEntry::parse("echo"));
  return c;
}

TEST(Digest, FrozenValues) {
  // Canonical forms ["t"] and ["read_file",["b",1],["path","a"]] hashed
  // with an external SHA-256 implementation.
  EXPECT_EQ(request_digest(req("s", {}, "t")), "2d06b2c705025d0ac359b8c29837bdd296790e2c334ba4b6aa60e35b8e9f3329");
  EXPECT_EQ(request_digest(req("s", {{"path", "a"}, {"b", 1}}, "read_file")),
            "2341e394b113d962ed60938bdc713de71beb02b1c01885c0ec7401dc54c4b015");
}

TEST(Digest, IgnoresRawFieldsSessionAndOrder) {
  auto a = req("s1", {{"command", "rm x"}, {"cwd", "/ws"}});
  auto b = req("s2", {{"cwd", "/ws"}, {"command", "rm x"}});
  b.raw_model_fields["requires_approval"] = "false";
  b.origin = {OriginKind::kWebResource, "http://evil"};
  EXPECT_EQ(request_digest(a), request_digest(b));
  EXPECT_NE(request_digest(a), request_digest(req("s1", {{"command", "rm y"}, {"cwd", "/ws"}})));
  EXPECT_NE(request_digest(req("s", {{"n", 1}})), request_digest(req("s", {{"n", "1"}})));
}

TEST(Finalize, DenyAlwaysRejects) {
  SessionStore store;
  ScriptedApprover yes({A::kApproved, A::kApproved});
  auto deny = Verdict::deny({"SHELL.DENYLIST", "x", "sudo"});
  for (auto mode : {ApprovalMode::kAlwaysAsk, ApprovalMode::kAutoApprove}) {
    EXPECT_EQ(finalize(deny, req("s", {}), config(mode), &yes, store).decision, FinalDecision::kReject);
  }
  EXPECT_EQ(yes.calls(), 0);
}

TEST(Finalize, AllowExecutes) {
  SessionStore store;
  EXPECT_EQ(finalize(Verdict::allow(), req("s", {}), config(), nullptr, store).decision, FinalDecision::kExecute);
}

TEST(Finalize, ApprovalIsCachedByDigest) {
  SessionStore store;
  ScriptedApprover approver({A::kApproved});
  auto r = req("s", {{"command", "rm -rf build"}});
  auto first = finalize(needs_approval(), r, config(), &approver, store);
  EXPECT_EQ(first.decision, FinalDecision::kExecute);
  EXPECT_FALSE(first.cache_hit);
  auto second = finalize(needs_approval(), r, config(), &approver, store);
  EXPECT_EQ(second.decision, FinalDecision::kExecute);
  EXPECT_TRUE(second.cache_hit);
  EXPECT_EQ(approver.calls(), 1);
}

TEST(Finalize, DenialIsCachedToo) {
  SessionStore store;
  ScriptedApprover approver({A::kDenied});
  auto r = req("s", {{"command", "rm -rf build"}});
  EXPECT_EQ(finalize(needs_approval(), r, config(), &approver, store).decision, FinalDecision::kReject);
  EXPECT_EQ(finalize(needs_approval(), r, config(), &approver, store).decision, FinalDecision::kReject);
  EXPECT_EQ(approver.calls(), 1);
}

TEST(Finalize, CacheDoesNotCrossSessions) {
  SessionStore store;
  ScriptedApprover approver({A::kApproved, A::kDenied});
  auto cmd = Arguments{{"command", "rm -rf build"}};
  EXPECT_EQ(finalize(needs_approval(), req("s1", cmd), config(), &approver, store).decision, FinalDecision::kExecute);
  EXPECT_EQ(finalize(needs_approval(), req("s2", cmd), config(), &approver, store).decision, FinalDecision::kReject);
  EXPECT_EQ(approver.calls(), 2);
  store.end_session("s1");
  EXPECT_EQ(store.size("s1"), 0u);
}

TEST(Finalize, AutoApproveIsFlaggedUnsafe) {
  SessionStore store;
  auto f = finalize(needs_approval(), req("s", {}), config(ApprovalMode::kAutoApprove), nullptr, store);
  EXPECT_EQ(f.decision, FinalDecision::kExecute);
  ASSERT_TRUE(f.record.has_value());
  EXPECT_EQ(f.record->approver_kind, ApproverKind::kPolicyAuto);
  bool flagged = false;
  for (const auto& h : f.audit_hits) flagged |= h.rule_id == rules::kApprovalUnsafeMode;
  EXPECT_TRUE(flagged);
}

TEST(Finalize, UnavailableApproverRejects) {
  SessionStore store;
  ScriptedApprover empty({});
  for (Approver* a : {static_cast<Approver*>(nullptr), static_cast<Approver*>(&empty)}) {
    auto f = finalize(needs_approval(), req("s", {}), config(), a, store);
    EXPECT_EQ(f.decision, FinalDecision::kReject);
    bool flagged = false;
    for (const auto& h : f.audit_hits) flagged |= h.rule_id == rules::kApprovalUnavailable;
    EXPECT_TRUE(flagged);
  }
  EXPECT_EQ(store.size("s"), 0u);
}

TEST(Finalize, TerminalApprover) {
  std::istringstream in("maybe\n YES \n");
  std::ostringstream out;
  TerminalApprover t(in, out);
  SessionStore store;
  EXPECT_EQ(finalize(needs_approval(), req("s", {{"command", "a"}}), config(), &t, store).decision,
            FinalDecision::kReject);
  EXPECT_EQ(finalize(needs_approval(), req("s", {{"command", "b"}}), config(), &t, store).decision,
            FinalDecision::kExecute);
  EXPECT_EQ(finalize(needs_approval(), req("s", {{"command", "c"}}), config(), &t, store).decision,
            FinalDecision::kReject);
  EXPECT_NE(out.str().find("SHELL.UNCOVERED"), std::string::npos);
}

// Field-injection variants of one command all hit the first approval.
TEST(FinalizeProperties, DigestStableAcrossFieldInjection) {
  ToolCatalog catalog({{"execute_command", Capability::kTerminal, true, {{"command", ParamKind::kString, true}}, false, ""}});
  auto cfg = config();
  SessionStore store;
  ScriptedApprover approver({A::kApproved});
  auto base = req("s", {{"command", "rm -rf build"}});
  auto v0 = evaluate(base, catalog, cfg);
  ASSERT_EQ(v0.decision, Decision::kRequireApproval);
  ASSERT_EQ(finalize(v0, base, cfg, &approver, store).decision, FinalDecision::kExecute);

  for (const char* field : {"requires_approval", "require_approval", "auto_approve", "safe"}) {
    for (const char* value : {"false", "true", "0"}) {
      auto raw = base;
      raw.raw_model_fields[field] = value;
      auto f = finalize(evaluate(raw, catalog, cfg), raw, cfg, &approver, store);
      EXPECT_TRUE(f.cache_hit) << field;
      EXPECT_EQ(f.decision, FinalDecision::kExecute);
      // Smuggled as an undeclared argument it never reaches the cache.
      auto arg = base;
      arg.arguments.emplace_back(field, std::string(value));
      auto v = evaluate(arg, catalog, cfg);
      EXPECT_EQ(v.decision, Decision::kDeny) << field;
      EXPECT_EQ(finalize(v, arg, cfg, &approver, store).decision, FinalDecision::kReject);
    }
  }
  EXPECT_EQ(approver.calls(), 1);
}

TEST(FinalizeProperties, DenyDominance) {
  std::mt19937 rng(4);
  SessionStore store;
  for (int n = 0; n < 1000; ++n) {
    std::vector<A> script(4, rng() % 2 ? A::kApproved : A::kDenied);
    ScriptedApprover approver(script);
    auto mode = rng() % 2 ? ApprovalMode::kAutoApprove : ApprovalMode::kAlwaysAsk;
    auto f = finalize(Verdict::deny({"X", "", ""}), req(std::to_string(rng() % 3), {{"k", n}}), config(mode),
                      &approver, store);
    EXPECT_EQ(f.decision, FinalDecision::kReject);
  }
}

TEST(FinalizeProperties, ConcurrentSameSessionPromptsOnce) {
  SessionStore store;
  ScriptedApprover approver({A::kApproved});
  auto r = req("s", {{"command", "rm -rf build"}});
  std::vector<std::thread> threads;
  std::atomic<int> executed{0};
  for (int i = 0; i < 16; ++i) {
    threads.emplace_back([&] {
      if (finalize(needs_approval(), r, config(), &approver, store).decision == FinalDecision::kExecute) ++executed;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(approver.calls(), 1);
  EXPECT_EQ(executed.load(), 16);
}

}  // namespace
}  // namespace tcfw
