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

#include "tcfw/shell.hpp"

#include <algorithm>
#include <bit>

#include "tcfw/rules.hpp"

namespace tcfw::shell {

using MC = MetacharCategory;

std::string_view short_name(MetacharCategory c) {
  switch (c) {
    case MC::kQuoting: return "Q";
    case MC::kRedirection: return "R";
    case MC::kPiping: return "P";
    case MC::kLogical: return "L";
    case MC::kGlob: return "G";
    case MC::kBrackets: return "B";
    case MC::kSubstitution: return "Sub";
    case MC::kSequencing: return "Seq";
    case MC::kLineBreak: return "LB";
  }
  return "?";
}

std::string_view rule_id(MetacharCategory c) {
  switch (c) {
    case MC::kQuoting: return rules::kShellQuoting;
    case MC::kRedirection: return rules::kShellRedirection;
    case MC::kPiping: return rules::kShellPiping;
    case MC::kLogical: return rules::kShellLogical;
    case MC::kGlob: return rules::kShellGlob;
    case MC::kBrackets: return rules::kShellBrackets;
    case MC::kSubstitution: return rules::kShellSubstitution;
    case MC::kSequencing: return rules::kShellSequencing;
    case MC::kLineBreak: return rules::kShellLineBreak;
  }
  return rules::kShellUnparsed;
}

std::size_t CategorySet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<MetacharCategory> CategorySet::members() const {
  std::vector<MetacharCategory> out;
  for (auto c : kAllCategories) {
    if (contains(c)) out.push_back(c);
  }
  return out;
}

std::string CategorySet::to_string() const {
  std::string s;
  for (auto c : members()) {
    if (!s.empty()) s += ',';
    s += short_name(c);
  }
  return s;
}

bool Redirection::is_benign() const {
  if (op == "<<" || op == "<<-" || op == "<<<") return false;
  if (!target.resolved()) return false;
  const std::string& t = target.text;
  if ((op == ">&" || op == "<&") && !t.empty() &&
      (t == "-" || std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))) {
    return true;
  }
  return t == "/dev/null";
}

std::vector<std::string> SimpleCommand::argv_text() const {
  std::vector<std::string> out;
  out.reserve(argv.size());
  for (const auto& w : argv) out.push_back(w.text);
  return out;
}

std::string SimpleCommand::display() const {
  std::string s;
  for (const auto& w : argv) {
    if (!s.empty()) s += ' ';
    s += w.text;
  }
  if (s.empty() && !leading_assignments.empty()) s = leading_assignments.front().text;
  if (s.empty() && !redirections.empty()) s = redirections.front().op + redirections.front().target.text;
  return s;
}

std::vector<ByteRange> CommandAnalysis::residue() const {
  std::vector<ByteRange> out;
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::kResidue) out.push_back(s.range);
  }
  return out;
}

bool CommandAnalysis::has_residue() const {
  return std::any_of(segments.begin(), segments.end(),
                     [](const Segment& s) { return s.kind == SegmentKind::kResidue; });
}

InputTooLarge::InputTooLarge(std::size_t size)
    : Error("command line of " + std::to_string(size) + " bytes exceeds the " +
            std::to_string(kMaxCommandLength) + " byte limit") {}

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }

bool is_operator_char(char c) {
  switch (c) {
    case ';': case '&': case '|': case '(': case ')': case '<': case '>': case '\n': case '\r':
      return true;
    default:
      return false;
  }
}

bool ends_word(char c) { return is_blank(c) || is_operator_char(c); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_name_char(char c) { return is_name_start(c) || is_digit(c); }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Decodes the body of $'...'. Returns false for escapes whose value is not
// reconstructed (\u, \U, \c).
bool decode_ansi_c(std::string_view body, std::string& out) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out += c;
      continue;
    }
    char e = body[++i];
    switch (e) {
      case 'a': out += '\a'; break;
      case 'b': out += '\b'; break;
      case 'e': case 'E': out += '\x1b'; break;
      case 'f': out += '\f'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 't': out += '\t'; break;
      case 'v': out += '\v'; break;
      case '\\': case '\'': case '"': case '?': out += e; break;
      case 'x': {
        int value = 0;
        int digits = 0;
        while (digits < 2 && i + 1 < body.size() && hex_value(body[i + 1]) >= 0) {
          value = value * 16 + hex_value(body[++i]);
          ++digits;
        }
        if (digits == 0) return false;
        out += static_cast<char>(value);
        break;
      }
      default:
        if (e >= '0' && e <= '7') {
          int value = e - '0';
          int digits = 1;
          while (digits < 3 && i + 1 < body.size() && body[i + 1] >= '0' && body[i + 1] <= '7') {
            value = value * 8 + (body[++i] - '0');
            ++digits;
          }
          out += static_cast<char>(value & 0xff);
        } else {
          return false;
        }
    }
  }
  return true;
}

bool is_compound_keyword(std::string_view w) {
  static constexpr std::string_view kWords[] = {
      "if",   "then",  "else",   "elif",   "fi",       "do",   "done",   "case",
      "esac", "while", "until",  "for",    "select",   "function", "time", "coproc",
      "[[",   "]]",    "in",
  };
  for (auto k : kWords) {
    if (k == w) return true;
  }
  return false;
}

struct PendingHeredoc {
  std::string delimiter;
  bool strip_tabs = false;
};

class Parser {
 public:
  Parser(std::string_view src, int depth, bool nested) : src_(src), depth_(depth), nested_(nested) {}

  CommandAnalysis run();

  // Nested parsers stop at the first unmatched ')'.
  bool terminated() const { return terminated_; }
  std::size_t consumed() const { return pos_; }

 private:
  std::size_t size() const { return src_.size(); }
  char peek(std::size_t offset = 0) const {
    return pos_ + offset < src_.size() ? src_[pos_ + offset] : '\0';
  }

  void flag(MC c) { out_.categories.insert(c); }
  void emit(SegmentKind kind, std::size_t begin, std::size_t end);
  void op(std::size_t length, std::initializer_list<MC> cats);
  void touch_command(std::size_t begin, std::size_t end);
  void end_command();
  void fail_from(std::size_t start);
  void mark_unparsed(std::size_t begin, std::size_t end);
  // Bash would reject the input; nothing after this point is guaranteed to
  // run as analyzed.
  void syntax_error() { out_.parse_complete = false; }
  void separator(bool binary);
  void saw_command();

  void comment();
  void redirection(std::size_t start, std::string io_number);
  void process_substitution();
  void word();
  void read_heredocs();

  // Word lexing. Each returns false when the construct is unterminated or
  // nests too deep; the caller turns the rest of the input into residue.
  bool lex_word(Word& w, bool& assignment);
  bool lex_double_quoted(Word& w);
  bool lex_backtick(Word& w);
  bool lex_dollar(Word& w, bool in_double_quotes);
  bool bracket_closes_ahead(std::size_t at);

  std::string_view src_;
  int depth_;
  bool nested_;
  std::size_t pos_ = 0;
  bool terminated_ = false;
  int paren_depth_ = 0;

  CommandAnalysis out_;
  std::size_t cursor_ = 0;
  SimpleCommand current_;
  bool current_open_ = false;
  std::vector<PendingHeredoc> pending_heredocs_;

  // Grammar state for syntax checks.
  bool have_command_ = false;  // the current pipeline element is non-empty
  bool need_command_ = false;  // after && || | |&
  bool group_closed_ = false;  // after ')' or '}' closing a group
  bool group_opened_ = false;  // directly after '('
  int brace_depth_ = 0;

  // Cache for bracket_closes_ahead: [scan_from, scan_end) was scanned and the
  // first ']' (if any) sits at close_at.
  std::size_t bracket_scan_end_ = 0;
  std::size_t bracket_close_at_ = std::string_view::npos;
};

void Parser::emit(SegmentKind kind, std::size_t begin, std::size_t end) {
  if (begin > cursor_) out_.segments.push_back({SegmentKind::kWhitespace, {cursor_, begin}});
  if (end > begin) out_.segments.push_back({kind, {begin, end}});
  cursor_ = std::max(cursor_, end);
}

void Parser::op(std::size_t length, std::initializer_list<MC> cats) {
  end_command();
  for (auto c : cats) flag(c);
  emit(SegmentKind::kOperator, pos_, pos_ + length);
  pos_ += length;
}

void Parser::touch_command(std::size_t begin, std::size_t end) {
  if (!current_open_) {
    current_open_ = true;
    current_.range = {begin, end};
  }
  current_.range.end = std::max(current_.range.end, end);
}

void Parser::end_command() {
  if (!current_open_) return;
  emit(SegmentKind::kCommand, current_.range.begin, current_.range.end);
  out_.simple_commands.push_back(std::move(current_));
  current_ = SimpleCommand{};
  current_open_ = false;
}

void Parser::separator(bool binary) {
  if (!have_command_) syntax_error();
  have_command_ = false;
  need_command_ = binary;
  group_closed_ = false;
  group_opened_ = false;
}

void Parser::saw_command() {
  if (group_closed_) syntax_error();
  have_command_ = true;
  need_command_ = false;
  group_opened_ = false;
}

void Parser::fail_from(std::size_t start) {
  end_command();
  start = std::max(start, cursor_);
  emit(SegmentKind::kResidue, start, size());
  out_.parse_complete = false;
  pos_ = size();
}

void Parser::mark_unparsed(std::size_t begin, std::size_t end) {
  out_.unparsed.push_back({begin, end});
  out_.parse_complete = false;
}

CommandAnalysis Parser::run() {
  while (pos_ < size()) {
    char c = src_[pos_];
    if (is_blank(c)) {
      ++pos_;
      continue;
    }
    if (c == '\\' && peek(1) == '\n') {
      flag(MC::kQuoting);
      pos_ += 2;
      continue;
    }
    switch (c) {
      case '#':
        comment();
        continue;
      case '\n':
        op(1, {MC::kLineBreak});
        if (!need_command_) {
          have_command_ = false;
          group_closed_ = false;
        }
        read_heredocs();
        continue;
      case '\r': {
        // Carriage returns are word characters to bash but separators to
        // other shells; split on them and refuse to call the parse complete.
        std::size_t len = peek(1) == '\n' ? 2 : 1;
        op(len, {MC::kLineBreak});
        out_.parse_complete = false;
        if (!need_command_) {
          have_command_ = false;
          group_closed_ = false;
        }
        if (len == 2) read_heredocs();
        continue;
      }
      case ';':
        separator(false);
        op(1, {MC::kSequencing});
        continue;
      case '&':
        if (peek(1) == '&') {
          separator(true);
          op(2, {MC::kLogical});
        } else if (peek(1) == '>') {
          redirection(pos_, {});
        } else {
          separator(false);
          op(1, {MC::kSequencing});
        }
        continue;
      case '|':
        separator(true);
        if (peek(1) == '|') {
          op(2, {MC::kLogical});
        } else if (peek(1) == '&') {
          op(2, {MC::kPiping});
        } else {
          op(1, {MC::kPiping});
        }
        continue;
      case '(':
        if (current_open_ || have_command_ || group_closed_) syntax_error();
        op(1, {MC::kBrackets});
        ++paren_depth_;
        need_command_ = false;
        group_opened_ = true;
        continue;
      case ')':
        if (paren_depth_ == 0 && nested_) {
          if (need_command_ || brace_depth_ > 0) syntax_error();
          end_command();
          terminated_ = true;
          break;
        }
        if (paren_depth_ == 0 || need_command_ || group_opened_) syntax_error();
        op(1, {MC::kBrackets});
        if (paren_depth_ > 0) --paren_depth_;
        have_command_ = true;
        group_closed_ = true;
        continue;
      case '<':
      case '>':
        if (peek(1) == '(') {
          process_substitution();
        } else {
          redirection(pos_, {});
        }
        continue;
      default:
        break;
    }
    if (terminated_) break;

    if (is_digit(c)) {
      std::size_t i = pos_;
      while (i < size() && is_digit(src_[i])) ++i;
      if (i < size() && (src_[i] == '<' || src_[i] == '>') &&
          !(i + 1 < size() && src_[i + 1] == '(')) {
        std::size_t start = pos_;
        std::string io(src_.substr(pos_, i - pos_));
        pos_ = i;
        redirection(start, std::move(io));
        continue;
      }
    }
    word();
  }
  end_command();

  std::size_t limit = terminated_ ? pos_ : size();
  if (cursor_ < limit) out_.segments.push_back({SegmentKind::kWhitespace, {cursor_, limit}});
  out_.source = std::string(src_.substr(0, limit));
  if (!pending_heredocs_.empty()) out_.parse_complete = false;
  if (!terminated_ && (need_command_ || paren_depth_ > 0 || brace_depth_ > 0)) syntax_error();
  return std::move(out_);
}

void Parser::comment() {
  std::size_t start = pos_;
  std::size_t end = src_.find('\n', pos_);
  if (end == std::string_view::npos) end = size();
  end_command();
  out_.comments.push_back({start, end});
  emit(SegmentKind::kComment, start, end);
  pos_ = end;
}

void Parser::read_heredocs() {
  if (pending_heredocs_.empty()) return;
  auto pending = std::move(pending_heredocs_);
  pending_heredocs_.clear();
  for (const auto& doc : pending) {
    std::size_t body_start = pos_;
    bool found = false;
    while (pos_ < size()) {
      std::size_t line_end = src_.find('\n', pos_);
      if (line_end == std::string_view::npos) line_end = size();
      std::string_view line = src_.substr(pos_, line_end - pos_);
      if (doc.strip_tabs) {
        while (!line.empty() && line.front() == '\t') line.remove_prefix(1);
      }
      pos_ = line_end < size() ? line_end + 1 : size();
      if (line == doc.delimiter) {
        found = true;
        break;
      }
    }
    end_command();
    emit(SegmentKind::kResidue, body_start, pos_);
    mark_unparsed(body_start, pos_);
    if (!found) return;
  }
}

void Parser::redirection(std::size_t start, std::string io_number) {
  std::size_t len = 1;
  char c = peek();
  char n1 = peek(1);
  char n2 = peek(2);
  if (c == '<') {
    if (n1 == '<' && n2 == '<') {
      len = 3;
    } else if (n1 == '<' && n2 == '-') {
      len = 3;
    } else if (n1 == '<' || n1 == '&' || n1 == '>') {
      len = 2;
    }
  } else if (c == '>') {
    if (n1 == '>' || n1 == '&' || n1 == '|') len = 2;
  } else {  // '&'
    len = n2 == '>' ? 3 : 2;
  }
  flag(MC::kRedirection);

  Redirection r;
  r.io_number = std::move(io_number);
  r.op = std::string(src_.substr(pos_, len));
  pos_ += len;
  std::size_t op_end = pos_;

  while (pos_ < size() && (is_blank(src_[pos_]) || (src_[pos_] == '\\' && peek(1) == '\n'))) {
    pos_ += is_blank(src_[pos_]) ? 1 : 2;
  }
  if (pos_ < size() && !ends_word(src_[pos_]) && src_[pos_] != '#') {
    std::size_t word_start = pos_;
    bool assignment = false;
    if (!lex_word(r.target, assignment)) {
      fail_from(start);
      return;
    }
    r.target.range = {word_start, pos_};
    r.range = {start, pos_};
  } else {
    r.range = {start, op_end};
    syntax_error();
  }
  if (!current_open_) {
    // Redirections may follow a closed group; they still start no new
    // pipeline element.
    bool closed = group_closed_;
    group_closed_ = false;
    saw_command();
    group_closed_ = closed;
  }
  touch_command(start, r.range.end);

  if (r.op == "<<" || r.op == "<<-") {
    pending_heredocs_.push_back({r.target.text, r.op == "<<-"});
    out_.parse_complete = false;
  }
  current_.redirections.push_back(std::move(r));
}

void Parser::process_substitution() {
  std::size_t start = pos_;
  flag(MC::kSubstitution);
  if (depth_ + 1 > kMaxNesting) {
    fail_from(start);
    return;
  }
  Parser inner(src_.substr(pos_ + 2), depth_ + 1, true);
  auto body = inner.run();
  if (!inner.terminated()) {
    out_.categories |= body.categories;
    fail_from(start);
    return;
  }
  std::size_t end = pos_ + 2 + inner.consumed() + 1;
  out_.categories |= body.categories;

  Word w;
  w.text = std::string(src_.substr(start, end - start));
  w.range = {start, end};
  w.has_substitution = true;
  out_.substitutions.push_back(
      {{start, end}, start + 2, true, std::make_shared<const CommandAnalysis>(std::move(body))});
  mark_unparsed(start, end);
  pos_ = end;
  saw_command();
  touch_command(start, end);
  current_.argv.push_back(std::move(w));
}

void Parser::word() {
  std::size_t start = pos_;
  Word w;
  bool assignment = false;
  if (!lex_word(w, assignment)) {
    fail_from(start);
    return;
  }
  w.range = {start, pos_};

  if (!w.quoted && (w.text == "[[" || w.text == "]]")) flag(MC::kBrackets);

  bool at_command_start = !current_open_;
  if (at_command_start && !w.quoted && (w.text == "{" || w.text == "}" || w.text == "!")) {
    // Reserved words: brace group delimiters and pipeline negation.
    if (w.text == "{") {
      if (have_command_ || group_closed_) syntax_error();
      ++brace_depth_;
      need_command_ = false;
    } else if (w.text == "}") {
      if (brace_depth_ == 0 || need_command_ || have_command_) syntax_error();
      if (brace_depth_ > 0) --brace_depth_;
      have_command_ = true;
      group_closed_ = true;
    } else if (have_command_ || group_closed_) {
      syntax_error();
    }
    emit(SegmentKind::kOperator, start, pos_);
    return;
  }
  if (at_command_start && !w.quoted && is_compound_keyword(w.text)) {
    // Compound commands change which words run; not modeled.
    mark_unparsed(start, pos_);
  }
  saw_command();
  touch_command(start, pos_);
  if (assignment && current_.argv.empty()) {
    current_.leading_assignments.push_back(std::move(w));
  } else {
    current_.argv.push_back(std::move(w));
  }
}

bool Parser::bracket_closes_ahead(std::size_t at) {
  if (at < bracket_scan_end_) return bracket_close_at_ != std::string_view::npos && at < bracket_close_at_;
  std::size_t i = at + 1;
  while (i < size() && !ends_word(src_[i]) && src_[i] != ']') ++i;
  bracket_scan_end_ = i;
  bracket_close_at_ = (i < size() && src_[i] == ']') ? i : std::string_view::npos;
  if (bracket_close_at_ != std::string_view::npos) bracket_scan_end_ = bracket_close_at_;
  return bracket_close_at_ != std::string_view::npos;
}

bool Parser::lex_word(Word& w, bool& assignment) {
  std::size_t start = pos_;
  bool name_prefix = true;  // every byte so far could belong to NAME
  std::size_t name_len = 0;
  std::size_t eq_pos = std::string_view::npos;
  auto not_a_name = [&] {
    if (!assignment) name_prefix = false;
  };

  while (pos_ < size()) {
    char c = src_[pos_];
    if (ends_word(c)) break;
    switch (c) {
      case '\\':
        not_a_name();
        flag(MC::kQuoting);
        w.quoted = true;
        if (pos_ + 1 < size()) {
          if (src_[pos_ + 1] != '\n') w.text += src_[pos_ + 1];
          pos_ += 2;
        } else {
          w.text += '\\';
          ++pos_;
        }
        break;
      case '\'': {
        not_a_name();
        flag(MC::kQuoting);
        w.quoted = true;
        std::size_t close = src_.find('\'', pos_ + 1);
        if (close == std::string_view::npos) return false;
        w.text.append(src_.substr(pos_ + 1, close - pos_ - 1));
        pos_ = close + 1;
        break;
      }
      case '"':
        not_a_name();
        if (!lex_double_quoted(w)) return false;
        break;
      case '`':
        not_a_name();
        if (!lex_backtick(w)) return false;
        break;
      case '$':
        not_a_name();
        if (!lex_dollar(w, false)) return false;
        break;
      case '*':
      case '?':
        not_a_name();
        flag(MC::kGlob);
        w.has_glob = true;
        w.text += c;
        ++pos_;
        break;
      case '[':
        not_a_name();
        if (bracket_closes_ahead(pos_)) {
          flag(MC::kGlob);
          w.has_glob = true;
        }
        w.text += c;
        ++pos_;
        break;
      case '{':
      case '}':
        not_a_name();
        flag(MC::kBrackets);
        w.has_brace = true;
        w.text += c;
        ++pos_;
        break;
      case '~':
        if (pos_ == start || (assignment && pos_ == eq_pos + 1)) {
          flag(MC::kSubstitution);
          w.has_substitution = true;
        }
        not_a_name();
        w.text += c;
        ++pos_;
        break;
      case '=':
        if (!assignment && name_prefix && name_len > 0) {
          assignment = true;
          eq_pos = pos_;
        } else {
          not_a_name();
        }
        w.text += c;
        ++pos_;
        break;
      default:
        if (!assignment) {
          bool plus_eq = c == '+' && peek(1) == '=' && name_len > 0;
          if (plus_eq) {
            // NAME+=value
          } else if (is_name_char(c) && (name_len > 0 || is_name_start(c))) {
            ++name_len;
          } else {
            name_prefix = false;
          }
        }
        w.text += c;
        ++pos_;
        break;
    }
  }
  return true;
}

bool Parser::lex_double_quoted(Word& w) {
  flag(MC::kQuoting);
  w.quoted = true;
  ++pos_;
  while (pos_ < size()) {
    char c = src_[pos_];
    switch (c) {
      case '"':
        ++pos_;
        return true;
      case '\\': {
        char n = peek(1);
        if (n == '$' || n == '`' || n == '"' || n == '\\') {
          w.text += n;
          pos_ += 2;
        } else if (n == '\n') {
          pos_ += 2;
        } else {
          w.text += '\\';
          ++pos_;
        }
        break;
      }
      case '`':
        if (!lex_backtick(w)) return false;
        break;
      case '$':
        if (!lex_dollar(w, true)) return false;
        break;
      default:
        w.text += c;
        ++pos_;
    }
  }
  return false;
}

bool Parser::lex_backtick(Word& w) {
  flag(MC::kSubstitution);
  w.has_substitution = true;
  std::size_t start = pos_;
  std::size_t i = pos_ + 1;
  while (i < size()) {
    if (src_[i] == '\\') {
      i += 2;
      continue;
    }
    if (src_[i] == '`') break;
    ++i;
  }
  if (i >= size() || depth_ + 1 > kMaxNesting) return false;

  std::string_view raw = src_.substr(start + 1, i - start - 1);
  std::string body;
  body.reserve(raw.size());
  bool verbatim = true;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (raw[k] == '\\' && k + 1 < raw.size() &&
        (raw[k + 1] == '`' || raw[k + 1] == '\\' || raw[k + 1] == '$')) {
      body += raw[++k];
      verbatim = false;
    } else {
      body += raw[k];
    }
  }
  Parser inner(body, depth_ + 1, false);
  auto analysis = inner.run();
  out_.categories |= analysis.categories;
  if (!analysis.parse_complete) out_.parse_complete = false;
  out_.substitutions.push_back({{start, i + 1},
                                start + 1,
                                verbatim,
                                std::make_shared<const CommandAnalysis>(std::move(analysis))});
  w.text.append(src_.substr(start, i + 1 - start));
  pos_ = i + 1;
  return true;
}

bool Parser::lex_dollar(Word& w, bool in_double_quotes) {
  std::size_t start = pos_;
  char n = peek(1);

  if (n == '(' && peek(2) == '(') {
    // Arithmetic expansion: located by paren counting, never analyzed.
    int depth = 2;
    std::size_t i = pos_ + 3;
    while (i < size() && depth > 0) {
      char c = src_[i];
      if (c == '\\') {
        i += 2;
        continue;
      }
      if (c == '\'' || c == '"') {
        std::size_t close = src_.find(c, i + 1);
        if (close == std::string_view::npos) return false;
        i = close + 1;
        continue;
      }
      if (c == '(') ++depth;
      if (c == ')') --depth;
      ++i;
    }
    if (depth > 0) return false;
    flag(MC::kSubstitution);
    w.has_substitution = true;
    w.text.append(src_.substr(start, i - start));
    mark_unparsed(start, i);
    pos_ = i;
    return true;
  }

  if (n == '(') {
    flag(MC::kSubstitution);
    w.has_substitution = true;
    if (depth_ + 1 > kMaxNesting) return false;
    Parser inner(src_.substr(pos_ + 2), depth_ + 1, true);
    auto body = inner.run();
    out_.categories |= body.categories;
    if (!inner.terminated()) return false;
    if (!body.parse_complete) out_.parse_complete = false;
    std::size_t end = pos_ + 2 + inner.consumed() + 1;
    out_.substitutions.push_back(
        {{start, end}, start + 2, true, std::make_shared<const CommandAnalysis>(std::move(body))});
    w.text.append(src_.substr(start, end - start));
    pos_ = end;
    return true;
  }

  if (n == '{') {
    flag(MC::kSubstitution);
    w.has_substitution = true;
    int depth = 1;
    std::size_t i = pos_ + 2;
    while (i < size() && depth > 0) {
      char c = src_[i];
      if (c == '\\') {
        i += 2;
        continue;
      }
      if (c == '\'' || c == '"') {
        std::size_t close = src_.find(c, i + 1);
        if (close == std::string_view::npos) return false;
        i = close + 1;
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}') --depth;
      ++i;
    }
    if (depth > 0) return false;
    std::string_view body = src_.substr(pos_ + 2, i - 1 - (pos_ + 2));
    if (body.empty() || body.find_first_of("`$(){}'\"\\") != std::string_view::npos) {
      w.opaque = true;
      mark_unparsed(start, i);
    }
    w.text.append(src_.substr(start, i - start));
    pos_ = i;
    return true;
  }

  if (n == '\'' && !in_double_quotes) {
    flag(MC::kQuoting);
    w.quoted = true;
    std::size_t i = pos_ + 2;
    while (i < size() && src_[i] != '\'') i += src_[i] == '\\' ? 2 : 1;
    if (i >= size()) return false;
    std::string decoded;
    if (decode_ansi_c(src_.substr(pos_ + 2, i - pos_ - 2), decoded)) {
      w.text += decoded;
    } else {
      w.opaque = true;
      w.text.append(src_.substr(start, i + 1 - start));
    }
    pos_ = i + 1;
    return true;
  }

  if (n == '"' && !in_double_quotes) {
    ++pos_;
    return lex_double_quoted(w);
  }

  if (is_name_start(n)) {
    std::size_t i = pos_ + 1;
    while (i < size() && is_name_char(src_[i])) ++i;
    flag(MC::kSubstitution);
    w.has_substitution = true;
    w.text.append(src_.substr(start, i - start));
    pos_ = i;
    return true;
  }

  if (is_digit(n) || n == '@' || n == '*' || n == '#' || n == '?' || n == '$' || n == '!' ||
      n == '-') {
    flag(MC::kSubstitution);
    w.has_substitution = true;
    w.text.append(src_.substr(start, 2));
    pos_ += 2;
    return true;
  }

  w.text += '$';
  ++pos_;
  return true;
}

void collect_comments(const CommandAnalysis& a, std::size_t offset, std::vector<ByteRange>& out) {
  for (const auto& c : a.comments) out.push_back({c.begin + offset, c.end + offset});
  for (const auto& s : a.substitutions) {
    if (s.body_verbatim && s.body) collect_comments(*s.body, offset + s.body_offset, out);
  }
}

void flatten_into(const CommandAnalysis& a, std::vector<SimpleCommand>& out) {
  auto subs = a.substitutions;
  std::sort(subs.begin(), subs.end(),
            [](const Substitution& x, const Substitution& y) { return x.range.begin < y.range.begin; });
  std::size_t si = 0;
  for (const auto& cmd : a.simple_commands) {
    while (si < subs.size() && subs[si].range.begin < cmd.range.begin) {
      if (subs[si].body) flatten_into(*subs[si].body, out);
      ++si;
    }
    out.push_back(cmd);
  }
  for (; si < subs.size(); ++si) {
    if (subs[si].body) flatten_into(*subs[si].body, out);
  }
}

}  // namespace

CommandAnalysis analyze(std::string_view command_line) {
  if (command_line.size() > kMaxCommandLength) throw InputTooLarge(command_line.size());
  Parser parser(command_line, 0, false);
  return parser.run();
}

std::pair<std::string, std::vector<ByteRange>> strip_comments(std::string_view command_line) {
  if (command_line.size() > kMaxCommandLength) return {std::string(command_line), {}};
  auto analysis = analyze(command_line);
  std::vector<ByteRange> ranges;
  collect_comments(analysis, 0, ranges);
  std::sort(ranges.begin(), ranges.end(),
            [](const ByteRange& a, const ByteRange& b) { return a.begin < b.begin; });
  std::string stripped;
  stripped.reserve(command_line.size());
  std::size_t at = 0;
  for (const auto& r : ranges) {
    if (r.begin < at) continue;
    stripped.append(command_line.substr(at, r.begin - at));
    at = r.end;
  }
  stripped.append(command_line.substr(at));
  return {std::move(stripped), std::move(ranges)};
}

std::vector<SimpleCommand> flatten_commands(const CommandAnalysis& analysis) {
  std::vector<SimpleCommand> out;
  flatten_into(analysis, out);
  return out;
}

}  // namespace tcfw::shell
