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

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcfw/approval.hpp"
#include "tcfw/paths.hpp"
#include "tcfw/shell.hpp"
#include "tcfw/types.hpp"

namespace tcfw::corpus {

enum class Category {
  kShellQ, kShellR, kShellP, kShellL, kShellG, kShellB, kShellSub, kShellSeq, kShellLB,
  kAllowlistBypass, kPathEscape, kConfigOverwrite, kToolUnknown, kToolDisabled,
  kApprovalFieldInjection, kFetchExfil, kRenderExfil, kBenign,
};

inline constexpr std::array kAllCategories = {
    Category::kShellQ,          Category::kShellR,        Category::kShellP,
    Category::kShellL,          Category::kShellG,        Category::kShellB,
    Category::kShellSub,        Category::kShellSeq,      Category::kShellLB,
    Category::kAllowlistBypass, Category::kPathEscape,    Category::kConfigOverwrite,
    Category::kToolUnknown,     Category::kToolDisabled,  Category::kApprovalFieldInjection,
    Category::kFetchExfil,      Category::kRenderExfil,   Category::kBenign,
};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);
// ShellQ -> Quoting, etc.; nullopt for non-shell categories.
std::optional<shell::MetacharCategory> metachar_of(Category c);

struct ApprovalExpectation {
  // "approve", "deny" or "unavailable".
  std::string approver;
  FinalDecision expect_final = FinalDecision::kReject;
  std::vector<std::string> expect_rules;
};

// An argument value of the form {"$repeat": unit, "times": n} expands to
// the unit repeated n times.
struct CorpusCase {
  std::string id;
  Category category = Category::kBenign;
  ToolCallRequest request;
  Decision expected = Decision::kAllow;
  // Rule ids that must appear in the verdict.
  std::vector<std::string> expect_rules;
  // Analyzer categories (short names) the command must be flagged with.
  shell::CategorySet expect_categories;
  std::string anchor;
  // Partial policy document merged over the base config; null when absent.
  Value config;
  std::optional<ApprovalExpectation> approval;
  // Route the audit record through a sink whose writes fail.
  bool audit_degraded = false;
  int line = 0;
};

struct ChainScenario {
  std::string id;
  std::vector<std::string> steps;
  std::size_t break_at = 0;
  // Step indices the scripted user approves; all others are refused.
  std::set<std::size_t> approve;
  std::string anchor;
  int line = 0;
};

struct Corpus {
  std::vector<CorpusCase> cases;
  std::vector<ChainScenario> chains;
  // Shared filesystem fixture (host_from_fixture format).
  Value fixture;

  const CorpusCase* find(std::string_view id) const;
};

class CorpusError : public Error {
 public:
  CorpusError(const std::string& file, int line, const std::string& id, const std::string& field,
              const std::string& message);
  const std::string& case_id() const { return id_; }
  const std::string& field() const { return field_; }

 private:
  std::string id_;
  std::string field_;
};

Corpus parse_corpus(std::string_view text, const std::string& file = "<corpus>");
Corpus load_corpus(const std::string& path);

// Evaluates one request under an effective config. Must be thread-safe when
// used with RunOptions::parallel > 1.
using Evaluator = std::function<Verdict(const ToolCallRequest&, const PolicyConfig&)>;

Evaluator local_evaluator(const ToolCatalog& catalog, paths::HostContext host);

PolicyConfig effective_config(const PolicyConfig& base, const Value& overrides);

enum class Status { kPass, kWeaker, kStricter, kMissingRule, kCategoryMiss, kApprovalMismatch, kError };
std::string_view to_string(Status s);

struct CaseResult {
  std::string id;
  Category category = Category::kBenign;
  Decision expected = Decision::kAllow;
  Decision actual = Decision::kAllow;
  std::vector<std::string> rule_ids;
  std::optional<FinalDecision> final_decision;
  Status status = Status::kPass;
  std::string detail;
};

struct ChainStepResult {
  std::string case_id;
  Decision decision = Decision::kAllow;
  FinalDecision final_decision = FinalDecision::kReject;
  std::vector<std::string> rule_ids;
};

struct ChainReport {
  std::string id;
  std::vector<ChainStepResult> steps;
  std::optional<std::size_t> first_block;
  std::size_t break_at = 0;
  bool success = false;
};

struct Report {
  std::vector<CaseResult> cases;
  std::vector<ChainReport> chains;

  std::size_t failures() const;
  bool ok() const { return failures() == 0; }
};

struct RunOptions {
  unsigned parallel = 1;
};

CaseResult run_case(const CorpusCase& c, const PolicyConfig& base, const Evaluator& evaluate);
ChainReport run_chain(const ChainScenario& scenario, const Corpus& corpus, const PolicyConfig& base,
                      const Evaluator& evaluate);
// Cases (optionally in parallel), then chains in order.
Report run_corpus(const Corpus& corpus, const PolicyConfig& base, const Evaluator& evaluate,
                  RunOptions options = {});

// Byte-identical for identical inputs.
std::string report_markdown(const Report& report);
Value report_json(const Report& report);

}  // namespace tcfw::corpus
