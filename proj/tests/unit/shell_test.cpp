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
#include <set>
#include <string>
#include <vector>

#include "partition_check.hpp"
#include "shell_oracle.hpp"
#include "tcfw/shell.hpp"

namespace tcfw::shell {
namespace {

using MC = MetacharCategory;

std::vector<std::vector<std::string>> argvs(const std::vector<SimpleCommand>& cmds) {
  std::vector<std::vector<std::string>> out;
  for (const auto& c : cmds) out.push_back(c.argv_text());
  return out;
}

std::set<std::string> category_names(const CategorySet& set) {
  std::set<std::string> out;
  for (auto c : set.members()) out.insert(std::string(short_name(c)));
  return out;
}

::testing::AssertionResult partitions(const CommandAnalysis& a) {
  auto why = oracle::partition_violation(a);
  if (why.empty()) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << why;
}

TEST(ShellAnalyze, PlainCommandHasNoCategories) {
  auto a = analyze("ls");
  EXPECT_TRUE(a.categories.empty());
  EXPECT_TRUE(a.parse_complete);
  ASSERT_EQ(a.simple_commands.size(), 1u);
  EXPECT_EQ(a.simple_commands[0].argv_text(), std::vector<std::string>{"ls"});
}

TEST(ShellAnalyze, BacktickIsSubstitution) {
  auto a = analyze("echo `rm -rf *`");
  EXPECT_TRUE(a.categories.contains(MC::kSubstitution));
  EXPECT_FALSE(a.categories.contains(MC::kQuoting));
  ASSERT_EQ(a.substitutions.size(), 1u);
  EXPECT_EQ(a.substitutions[0].body->source, "rm -rf *");
  EXPECT_EQ(argvs(flatten_commands(a)),
            (std::vector<std::vector<std::string>>{{"echo", "`rm -rf *`"}, {"rm", "-rf", "*"}}));
}

TEST(ShellAnalyze, LineBreakSplits) {
  auto a = analyze("echo hi\nrm -rf /");
  EXPECT_TRUE(a.categories.contains(MC::kLineBreak));
  EXPECT_EQ(argvs(a.simple_commands),
            (std::vector<std::vector<std::string>>{{"echo", "hi"}, {"rm", "-rf", "/"}}));
}

TEST(ShellAnalyze, CommentIsNotPartOfCommand) {
  auto a = analyze("rm -rf * # echo");
  EXPECT_EQ(argvs(a.simple_commands), (std::vector<std::vector<std::string>>{{"rm", "-rf", "*"}}));
  ASSERT_EQ(a.comments.size(), 1u);
  EXPECT_EQ(a.source.substr(a.comments[0].begin, a.comments[0].size()), "# echo");
  EXPECT_EQ(a.categories, CategorySet{MC::kGlob});
}

TEST(ShellAnalyze, CategoryTable) {
  struct Case {
    const char* src;
    MC expected;
  };
  const Case cases[] = {
      {"echo 'a b'", MC::kQuoting},       {"echo \"a\"", MC::kQuoting},
      {"echo a\\ b", MC::kQuoting},       {"echo $'x'", MC::kQuoting},
      {"echo a > f", MC::kRedirection},   {"echo a >> f", MC::kRedirection},
      {"cat < f", MC::kRedirection},      {"cat <<< w", MC::kRedirection},
      {"echo a 2>&1", MC::kRedirection},  {"echo a &> f", MC::kRedirection},
      {"a | b", MC::kPiping},             {"a |& b", MC::kPiping},
      {"a && b", MC::kLogical},           {"a || b", MC::kLogical},
      {"ls *", MC::kGlob},                {"ls a?", MC::kGlob},
      {"ls [ab]", MC::kGlob},             {"(ls)", MC::kBrackets},
      {"{ ls; }", MC::kBrackets},         {"[[ -f a ]]", MC::kBrackets},
      {"echo $(id)", MC::kSubstitution},  {"echo $HOME", MC::kSubstitution},
      {"echo ${HOME}", MC::kSubstitution}, {"diff <(a) b", MC::kSubstitution},
      {"tee >(a)", MC::kSubstitution},    {"echo $$", MC::kSubstitution},
      {"a; b", MC::kSequencing},          {"a & b", MC::kSequencing},
      {"a\nb", MC::kLineBreak},           {"a\rb", MC::kLineBreak},
  };
  for (const auto& c : cases) {
    auto a = analyze(c.src);
    EXPECT_TRUE(a.categories.contains(c.expected))
        << c.src << " -> " << a.categories.to_string() << " missing " << short_name(c.expected);
  }
}

TEST(ShellAnalyze, SingleQuotesOnlyYieldQuoting) {
  const char* payloads[] = {"a;b", "x | y && z", "$(id) `id`", "> f < g", "* ? [a]",
                            "( ) { }", "a\nb", "#c", "&", "${X}"};
  for (const char* p : payloads) {
    auto a = analyze(std::string("'") + p + "'");
    EXPECT_EQ(a.categories, CategorySet{MC::kQuoting}) << p;
    EXPECT_TRUE(a.parse_complete) << p;
  }
}

TEST(ShellAnalyze, AmpersandMaximalMunch) {
  auto a = analyze("a & b && c");
  EXPECT_TRUE(a.categories.contains(MC::kSequencing));
  EXPECT_TRUE(a.categories.contains(MC::kLogical));
  EXPECT_EQ(a.simple_commands.size(), 3u);
}

TEST(ShellAnalyze, ArithmeticAndHeredocAreUnparsed) {
  for (const char* s : {"echo $((1+2))", "cat <<EOF\nhi\nEOF", "diff <(ls) b", "echo ${X:-$(id)}"}) {
    auto a = analyze(s);
    EXPECT_FALSE(a.parse_complete) << s;
    EXPECT_FALSE(a.unparsed.empty()) << s;
    EXPECT_TRUE(partitions(a)) << s;
  }
}

TEST(ShellAnalyze, SyntaxErrorsAreIncomplete) {
  for (const char* s : {"; a", "a |", "a &&", "a >", "(a", "a)", "{ a", "()", "a (b)", "if true; then a; fi"}) {
    EXPECT_FALSE(analyze(s).parse_complete) << s;
  }
  for (const char* s : {"a; b", "a &", "(a) | b", "{ a; }", "a &&\nb", "$()", "a > /dev/null"}) {
    EXPECT_TRUE(analyze(s).parse_complete) << s;
  }
}

TEST(ShellAnalyze, AssignmentsAndRedirections) {
  auto a = analyze("FOO=1 BAR+=2 env 2>/dev/null");
  ASSERT_EQ(a.simple_commands.size(), 1u);
  const auto& c = a.simple_commands[0];
  EXPECT_EQ(c.leading_assignments.size(), 2u);
  EXPECT_EQ(c.argv_text(), std::vector<std::string>{"env"});
  ASSERT_EQ(c.redirections.size(), 1u);
  EXPECT_EQ(c.redirections[0].io_number, "2");
  EXPECT_TRUE(c.redirections[0].is_benign());
  EXPECT_FALSE(analyze("echo > out.txt").simple_commands[0].redirections[0].is_benign());
}

TEST(ShellAnalyze, AnsiCQuotingDecodes) {
  auto a = analyze("echo $'a\\x3bb'");
  EXPECT_EQ(a.simple_commands[0].argv_text(), (std::vector<std::string>{"echo", "a;b"}));
}

TEST(ShellAnalyze, InputTooLargeThrows) {
  std::string big(kMaxCommandLength + 1, 'a');
  EXPECT_THROW(analyze(big), InputTooLarge);
  EXPECT_NO_THROW(analyze(std::string(kMaxCommandLength, 'a')));
}

TEST(ShellAnalyze, DeepNestingIsResidue) {
  std::string s;
  for (int i = 0; i < kMaxNesting + 8; ++i) s += "$(";
  s += "a";
  for (int i = 0; i < kMaxNesting + 8; ++i) s += ")";
  auto a = analyze(s);
  EXPECT_FALSE(a.parse_complete);
  EXPECT_TRUE(partitions(a));
}

TEST(ShellFlatten, NestedSubstitutionsDepthFirst) {
  auto a = analyze("a $(b $(c))");
  auto names = argvs(flatten_commands(a));
  ASSERT_EQ(names.size(), 3u);
  EXPECT_EQ(names[0][0], "a");
  EXPECT_EQ(names[1][0], "b");
  EXPECT_EQ(names[2], std::vector<std::string>{"c"});
}

TEST(ShellFlatten, SubstitutionBeforeLaterCommand) {
  auto names = argvs(flatten_commands(analyze("x `y`; z")));
  ASSERT_EQ(names.size(), 3u);
  EXPECT_EQ(names[0][0], "x");
  EXPECT_EQ(names[1][0], "y");
  EXPECT_EQ(names[2][0], "z");
}

TEST(ShellStripComments, Examples) {
  auto [s1, r1] = strip_comments("rm -rf * # echo");
  EXPECT_EQ(s1, "rm -rf * ");
  EXPECT_EQ(r1.size(), 1u);
  auto [s2, r2] = strip_comments("echo '#notacomment'");
  EXPECT_EQ(s2, "echo '#notacomment'");
  EXPECT_TRUE(r2.empty());
  auto [s3, r3] = strip_comments("a#b");
  EXPECT_EQ(s3, "a#b");
  EXPECT_TRUE(r3.empty());
  auto [s4, r4] = strip_comments("echo $(id # x\n)");
  EXPECT_EQ(s4, "echo $(id \n)");
}

// Every string of length <= 6 over the 9-symbol alphabet: command
// boundaries, categories and completeness must match the naive scanner.
TEST(ShellOracle, ExhaustiveSmallAlphabet) {
  const std::string& alpha = oracle::kAlphabet;
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  std::string s;
  auto check = [&](const std::string& src) {
    ++checked;
    auto a = analyze(src);
    auto o = oracle::scan(src);
    bool ok = a.parse_complete == o.complete && partitions(a);
    if (ok && o.lexed) {
      ok = category_names(a.categories) == o.categories &&
           argvs(flatten_commands(a)) == o.commands;
    }
    if (!ok && ++mismatches <= 10) {
      ADD_FAILURE() << "mismatch for " << ::testing::PrintToString(src)
                    << " analyzer complete=" << a.parse_complete
                    << " cats=" << a.categories.to_string()
                    << " oracle complete=" << o.complete;
    }
  };
  std::vector<std::size_t> idx;
  for (std::size_t len = 0; len <= 6; ++len) {
    idx.assign(len, 0);
    for (;;) {
      s.clear();
      for (auto k : idx) s += alpha[k];
      check(s);
      std::size_t p = 0;
      while (p < len && ++idx[p] == alpha.size()) idx[p++] = 0;
      if (p == len) break;
    }
  }
  EXPECT_EQ(mismatches, 0u);
  EXPECT_EQ(checked, 1u + 9u + 81u + 729u + 6561u + 59049u + 531441u);
}

TEST(ShellProperties, RandomInputsPartitionAndNeverThrow) {
  std::mt19937_64 rng(0xC0FFEE);
  const std::string interesting = "a b;|&'\"`\\$(){}[]*?<>#~\n\r\t=!0129-";
  std::uniform_int_distribution<int> len(0, 64);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(interesting.size()) - 1);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int n = 0; n < 20000; ++n) {
    std::string s;
    int l = len(rng);
    for (int i = 0; i < l; ++i) {
      s += (n % 4 == 0) ? static_cast<char>(byte(rng)) : interesting[pick(rng)];
    }
    CommandAnalysis a;
    ASSERT_NO_THROW(a = analyze(s)) << ::testing::PrintToString(s);
    ASSERT_TRUE(partitions(a)) << ::testing::PrintToString(s);
    if (!a.parse_complete) {
      EXPECT_TRUE(!a.categories.empty() || a.has_residue() || !a.unparsed.empty())
          << ::testing::PrintToString(s);
    }
  }
}

}  // namespace
}  // namespace tcfw::shell
