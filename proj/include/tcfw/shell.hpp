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
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcfw/types.hpp"

namespace tcfw::shell {

inline constexpr std::size_t kMaxCommandLength = std::size_t{1} << 20;
// Deeper substitution nesting is reported as unparsed residue.
inline constexpr int kMaxNesting = 64;

// The nine Bash metacharacter families.
enum class MetacharCategory : std::uint8_t {
  kQuoting,       // ' " \ $'...'
  kRedirection,   // > >> < << <<< >& <& &> &>> >| <>
  kPiping,        // | |&
  kLogical,       // && ||
  kGlob,          // * ? [...]
  kBrackets,      // ( ) { } [[ ]]
  kSubstitution,  // `...` $(...) $VAR ${...} <(...) >(...) ~
  kSequencing,    // ; &
  kLineBreak,     // \n \r
};

inline constexpr std::array kAllCategories = {
    MetacharCategory::kQuoting,   MetacharCategory::kRedirection, MetacharCategory::kPiping,
    MetacharCategory::kLogical,   MetacharCategory::kGlob,        MetacharCategory::kBrackets,
    MetacharCategory::kSubstitution, MetacharCategory::kSequencing, MetacharCategory::kLineBreak,
};

// Short table names: Q R P L G B Sub Seq LB.
std::string_view short_name(MetacharCategory c);
std::string_view rule_id(MetacharCategory c);

class CategorySet {
 public:
  constexpr CategorySet() = default;
  constexpr CategorySet(std::initializer_list<MetacharCategory> cs) {
    for (auto c : cs) insert(c);
  }

  constexpr void insert(MetacharCategory c) { bits_ |= bit(c); }
  constexpr bool contains(MetacharCategory c) const { return (bits_ & bit(c)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint16_t bits() const { return bits_; }
  std::size_t size() const;
  std::vector<MetacharCategory> members() const;
  // "Q,Sub" style rendering, in table order.
  std::string to_string() const;

  constexpr CategorySet& operator|=(CategorySet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr bool operator==(const CategorySet&) const = default;

 private:
  static constexpr std::uint16_t bit(MetacharCategory c) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(c));
  }
  std::uint16_t bits_ = 0;
};

struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(const ByteRange& o) const { return begin <= o.begin && o.end <= end; }
  bool operator==(const ByteRange&) const = default;
};

// One shell word after quote removal. Expansions are kept verbatim in
// `text` and flagged, since their runtime value is unknown.
struct Word {
  std::string text;
  ByteRange range;
  bool quoted = false;
  bool has_substitution = false;
  bool has_glob = false;
  bool has_brace = false;
  // Constructs whose literal value is not reconstructed ($'...' escapes,
  // complex parameter expansions).
  bool opaque = false;

  bool resolved() const { return !has_substitution && !has_glob && !has_brace && !opaque; }
};

struct Redirection {
  std::string io_number;
  std::string op;
  Word target;
  ByteRange range;

  // Duplications and closes (>&2, <&-, 2>&1) and /dev/null touch no files.
  bool is_benign() const;
};

struct SimpleCommand {
  std::vector<Word> argv;
  std::vector<Word> leading_assignments;
  std::vector<Redirection> redirections;
  ByteRange range;

  std::vector<std::string> argv_text() const;
  // argv joined by single spaces, for messages.
  std::string display() const;
};

enum class SegmentKind { kCommand, kOperator, kWhitespace, kComment, kResidue };

struct Segment {
  SegmentKind kind;
  ByteRange range;
};

struct CommandAnalysis;

struct Substitution {
  // Whole construct in the enclosing source, delimiters included.
  ByteRange range;
  // Offset of the body inside the enclosing source.
  std::size_t body_offset = 0;
  // False when backslash escapes were removed from a backtick body, in which
  // case body offsets no longer map one-to-one onto the enclosing source.
  bool body_verbatim = true;
  std::shared_ptr<const CommandAnalysis> body;
};

struct CommandAnalysis {
  std::string source;
  std::vector<SimpleCommand> simple_commands;
  // Union over this source and every nested substitution body.
  CategorySet categories;
  std::vector<Substitution> substitutions;
  std::vector<ByteRange> comments;
  // Ordered partition of [0, source.size()).
  std::vector<Segment> segments;
  // Constructs detected but not analyzed (arithmetic, process substitution,
  // here-document bodies, complex ${...}). May lie inside command segments.
  std::vector<ByteRange> unparsed;
  bool parse_complete = true;

  std::vector<ByteRange> residue() const;
  bool has_residue() const;
};

class InputTooLarge : public Error {
 public:
  explicit InputTooLarge(std::size_t size);
};

// Tokenizes and splits a POSIX shell command line. Total on arbitrary bytes;
// throws InputTooLarge past kMaxCommandLength.
CommandAnalysis analyze(std::string_view command_line);

// Removes unquoted comments (including those inside $(...) bodies) and
// returns the removed byte ranges in source order.
std::pair<std::string, std::vector<ByteRange>> strip_comments(std::string_view command_line);

// Top-level simple commands plus, recursively, those of every substitution
// body. Depth-first, source order.
std::vector<SimpleCommand> flatten_commands(const CommandAnalysis& analysis);

}  // namespace tcfw::shell
