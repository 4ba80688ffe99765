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

#include "tcfw/rules.hpp"
#include "tcfw/validator.hpp"

namespace tcfw {
namespace {

ToolCatalog catalog() {
  return ToolCatalog({
      {"read_tool", Capability::kFileRead, true, {{"path", ParamKind::kString, true}}, false, "path"},
      {"write_to_file",
       Capability::kFileWrite,
       false,
       {{"path", ParamKind::kString, true}, {"content", ParamKind::kString, true}},
       false,
       "path"},
      {"search",
       Capability::kWebSearch,
       true,
       {{"query", ParamKind::kString, true},
        {"limit", ParamKind::kInteger, false},
        {"tags", ParamKind::kList, false},
        {"safe", ParamKind::kBoolean, false}},
       false,
       "query"},
  });
}

ToolCallRequest request(std::string tool, Arguments args) {
  ToolCallRequest r;
  r.session_id = "s";
  r.tool_name = std::move(tool);
  r.arguments = std::move(args);
  return r;
}

TEST(Validate, Examples) {
  auto cat = catalog();
  EXPECT_EQ(validate(request("read_tool", {{"path", "source.py"}}), cat).decision, Decision::kAllow);
  auto disabled = validate(request("write_to_file", {{"path", "a"}, {"content", "b"}}), cat);
  EXPECT_EQ(disabled.decision, Decision::kDeny);
  EXPECT_TRUE(disabled.has_rule(rules::kToolDisabled));
  auto unknown = validate(request("format_disk", {}), cat);
  EXPECT_EQ(unknown.decision, Decision::kDeny);
  EXPECT_TRUE(unknown.has_rule(rules::kToolUnknown));
}

TEST(Validate, ToolNamesAreCaseSensitive) {
  EXPECT_TRUE(validate(request("Read_Tool", {{"path", "a"}}), catalog()).has_rule(rules::kToolUnknown));
}

TEST(Validate, SchemaViolations) {
  auto cat = catalog();
  auto deny_schema = [&](Arguments args) {
    auto v = validate(request("search", std::move(args)), cat);
    return v.decision == Decision::kDeny && v.has_rule(rules::kToolSchema);
  };
  EXPECT_FALSE(deny_schema({{"query", "x"}}));
  EXPECT_FALSE(deny_schema({{"query", "x"}, {"limit", 3}, {"tags", Value::array({"a", 1})}, {"safe", true}}));
  EXPECT_TRUE(deny_schema({}));
  EXPECT_TRUE(deny_schema({{"query", 1}}));
  EXPECT_TRUE(deny_schema({{"query", "x"}, {"limit", "3"}}));
  EXPECT_TRUE(deny_schema({{"query", "x"}, {"limit", 1.5}}));
  EXPECT_TRUE(deny_schema({{"query", "x"}, {"tags", Value::array({Value::array()})}}));
  EXPECT_TRUE(deny_schema({{"query", "x"}, {"tags", "a"}}));
  EXPECT_TRUE(deny_schema({{"query", "x"}, {"safe", "true"}}));
  EXPECT_TRUE(deny_schema({{"query", "x"}, {"extra", "y"}}));
  EXPECT_TRUE(deny_schema({{"query", Value::object()}}));
}

TEST(Validate, DisabledDominatesSchemaValidity) {
  auto cat = catalog();
  for (const Arguments& args :
       {Arguments{}, Arguments{{"path", 1}}, Arguments{{"path", "a"}, {"content", "b"}},
        Arguments{{"bogus", true}}}) {
    auto v = validate(request("write_to_file", args), cat);
    EXPECT_EQ(v.decision, Decision::kDeny);
    EXPECT_TRUE(v.has_rule(rules::kToolDisabled));
  }
}

// Decision must not depend on origin or raw_model_fields.
TEST(ValidateProperties, ClosedWorld) {
  auto cat = catalog();
  std::mt19937 rng(11);
  const std::vector<std::string> tools = {"read_tool", "write_to_file", "search", "nope"};
  const std::vector<std::string> names = {"path", "query", "limit", "requires_approval", "x"};
  const std::vector<Value> values = {"a", 1, true, Value::array({"x"}), Value()};
  for (int n = 0; n < 5000; ++n) {
    auto r = request(tools[rng() % tools.size()], {});
    int argc = static_cast<int>(rng() % 4);
    for (int i = 0; i < argc; ++i) r.arguments.emplace_back(names[rng() % names.size()], values[rng() % values.size()]);
    auto base = validate(r, cat);
    auto other = r;
    other.origin = {static_cast<OriginKind>(rng() % 8), "x"};
    other.raw_model_fields["requires_approval"] = "false";
    other.raw_model_fields["safe"] = "true";
    auto v = validate(other, cat);
    EXPECT_EQ(v.decision, base.decision);
    EXPECT_EQ(v.rule_ids(), base.rule_ids());
  }
}

TEST(Sanitize, RawFieldsMovedToAudit) {
  auto r = request("read_tool", {{"path", "a"}});
  r.raw_model_fields["requires_approval"] = "false";
  auto s = sanitize_untrusted_fields(r, PolicyConfig::default_strip_fields());
  EXPECT_TRUE(s.request.raw_model_fields.empty());
  EXPECT_EQ(s.stripped.at("requires_approval"), "false");
  EXPECT_EQ(s.request.arguments, r.arguments);
}

TEST(Sanitize, NoRawFieldsIsIdentity) {
  auto r = request("read_tool", {{"path", "a"}});
  auto s = sanitize_untrusted_fields(r, PolicyConfig::default_strip_fields());
  EXPECT_EQ(s.request, r);
  EXPECT_TRUE(s.stripped.empty());
  EXPECT_TRUE(s.flags.empty());
}

TEST(Sanitize, StripSetArgumentsNeverReachDownstream) {
  auto r = request("read_tool", {{"path", "a"}, {"auto_approve", true}, {"safe", "yes"}});
  auto s = sanitize_untrusted_fields(r, PolicyConfig::default_strip_fields(), catalog().find("read_tool"));
  EXPECT_EQ(s.request.find_argument("auto_approve"), nullptr);
  EXPECT_EQ(s.request.find_argument("safe"), nullptr);
  EXPECT_EQ(s.stripped.at("argument:auto_approve"), "true");
}

TEST(Sanitize, DeclaredSuspectFieldIsKeptAndFlagged) {
  auto r = request("search", {{"query", "a"}, {"safe", true}});
  auto s = sanitize_untrusted_fields(r, PolicyConfig::default_strip_fields(), catalog().find("search"));
  ASSERT_NE(s.request.find_argument("safe"), nullptr);
  ASSERT_EQ(s.flags.size(), 1u);
  EXPECT_EQ(s.flags[0].rule_id, rules::kToolSuspectField);
}

TEST(SanitizeProperties, Idempotent) {
  std::mt19937 rng(5);
  const std::vector<std::string> names = {"path", "safe", "require_approval", "auto_approve", "query", "q"};
  auto strip = PolicyConfig::default_strip_fields();
  auto cat = catalog();
  for (int n = 0; n < 3000; ++n) {
    auto r = request(n % 2 ? "search" : "read_tool", {});
    for (int i = 0; i < static_cast<int>(rng() % 5); ++i) r.arguments.emplace_back(names[rng() % names.size()], "v");
    if (rng() % 2) r.raw_model_fields["requires_approval"] = "false";
    const ToolSpec* spec = cat.find(r.tool_name);
    auto once = sanitize_untrusted_fields(r, strip, spec);
    auto twice = sanitize_untrusted_fields(once.request, strip, spec);
    EXPECT_EQ(twice.request, once.request);
    EXPECT_TRUE(twice.stripped.empty());
  }
}

}  // namespace
}  // namespace tcfw
