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


#include "tcfw/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "tcfw/audit.hpp"
#include "tcfw/pipeline.hpp"
#include "tcfw/rules.hpp"
#include "tcfw/serialization.hpp"

namespace tcfw::corpus {

namespace {

constexpr std::size_t kMaxTemplateBytes = std::size_t{8} << 20;

constexpr std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::kShellQ, "ShellQ"},
    {Category::kShellR, "ShellR"},
    {Category::kShellP, "ShellP"},
    {Category::kShellL, "ShellL"},
    {Category::kShellG, "ShellG"},
    {Category::kShellB, "ShellB"},
    {Category::kShellSub, "ShellSub"},
    {Category::kShellSeq, "ShellSeq"},
    {Category::kShellLB, "ShellLB"},
    {Category::kAllowlistBypass, "AllowlistBypass"},
    {Category::kPathEscape, "PathEscape"},
    {Category::kConfigOverwrite, "ConfigOverwrite"},
    {Category::kToolUnknown, "ToolUnknown"},
    {Category::kToolDisabled, "ToolDisabled"},
    {Category::kApprovalFieldInjection, "ApprovalFieldInjection"},
    {Category::kFetchExfil, "FetchExfil"},
    {Category::kRenderExfil, "RenderExfil"},
    {Category::kBenign, "Benign"},
};

std::string dotted(std::string_view pointer) {
  std::string s(pointer.substr(pointer.empty() ? 0 : 1));
  std::replace(s.begin(), s.end(), '/', '.');
  return s;
}

std::optional<shell::MetacharCategory> parse_short_name(std::string_view s) {
  for (auto c : shell::kAllCategories) {
    if (shell::short_name(c) == s) return c;
  }
  return std::nullopt;
}

// Parses one record, reporting errors against the record's line in the file.
class RecordReader {
 public:
  RecordReader(const JsonDocument& doc, int line, std::string id)
      : doc_(doc), line_(line), id_(std::move(id)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw CorpusError(doc_.file, line_, id_, field, message);
  }

  const Value& v() const { return doc_.value; }
  bool has(const char* key) const { return v().contains(key); }

  void require_fields(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [k, _] : v().items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail(k, "unknown field");
    }
  }

  std::string string(const char* key, bool required = true) const {
    if (!has(key)) {
      if (required) fail(key, "missing required field");
      return {};
    }
    if (!v()[key].is_string()) fail(key, "must be a string");
    return v()[key].get<std::string>();
  }

  std::vector<std::string> strings(const Value& value, const std::string& field) const {
    if (!value.is_array()) fail(field, "must be an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_string()) fail(field + "." + std::to_string(i), "must be a string");
      out.push_back(value[i].get<std::string>());
    }
    return out;
  }

  std::vector<std::string> rule_list(const Value& value, const std::string& field) const {
    auto ids = strings(value, field);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!rules::is_registered(ids[i])) fail(field + "." + std::to_string(i), "unknown rule id '" + ids[i] + "'");
    }
    return ids;
  }

  std::size_t index(const Value& value, const std::string& field) const {
    if (!value.is_number_unsigned()) fail(field, "must be a non-negative integer");
    return value.get<std::size_t>();
  }

 private:
  const JsonDocument& doc_;
  int line_;
  std::string id_;
};

Value merged_config_json(const PolicyConfig& base, const Value& overrides) {
  Value j = policy_config_to_json(base);
  for (const auto& [k, v] : overrides.items()) j[k] = v;
  return j;
}

CorpusCase parse_case(const JsonDocument& doc, int line) {
  const Value& v = doc.value;
  std::string id = v.contains("id") && v["id"].is_string() ? v["id"].get<std::string>() : "";
  RecordReader r(doc, line, id);
  r.require_fields({"type", "id", "category", "request", "expected", "expect_rules", "expect_categories", "anchor",
                    "config", "approval", "audit"});
  CorpusCase c;
  c.line = line;
  c.id = r.string("id");
  if (c.id.empty()) r.fail("id", "must be non-empty");

  auto category = parse_category(r.string("category"));
  if (!category) r.fail("category", "unknown category '" + v["category"].get<std::string>() + "'");
  c.category = *category;

  if (!r.has("request")) r.fail("request", "missing required field");
  try {
    c.request = request_from_json(doc, "/request");
  } catch (const WireError& e) {
    r.fail(e.field().empty() ? "request" : "request." + dotted("/" + e.field()), e.what());
  }

  for (auto& [key, value] : c.request.arguments) {
    if (!value.is_object() || !value.contains("$repeat")) continue;
    const std::string field = "request.arguments." + key;
    if (value.size() != 2 || !value["$repeat"].is_string() || !value.contains("times") ||
        !value["times"].is_number_unsigned()) {
      r.fail(field, "template must be {\"$repeat\": string, \"times\": count}");
    }
    auto unit = value["$repeat"].get<std::string>();
    auto times = value["times"].get<std::size_t>();
    if (unit.empty() || times > kMaxTemplateBytes / unit.size()) r.fail(field, "template expands too large");
    std::string expanded;
    expanded.reserve(unit.size() * times);
    for (std::size_t i = 0; i < times; ++i) expanded += unit;
    value = std::move(expanded);
  }

  auto expected = parse_decision(r.string("expected"));
  if (!expected) r.fail("expected", "must be allow, require_approval or deny");
  c.expected = *expected;
  if (c.category == Category::kBenign && c.expected != Decision::kAllow) {
    r.fail("expected", "benign cases must expect allow");
  }

  if (r.has("expect_rules")) c.expect_rules = r.rule_list(v["expect_rules"], "expect_rules");
  if (r.has("expect_categories")) {
    auto names = r.strings(v["expect_categories"], "expect_categories");
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto m = parse_short_name(names[i]);
      if (!m) r.fail("expect_categories." + std::to_string(i), "unknown metacharacter category '" + names[i] + "'");
      c.expect_categories.insert(*m);
    }
  }
  c.anchor = r.string("anchor");

  if (r.has("config")) {
    if (!v["config"].is_object()) r.fail("config", "must be an object");
    PolicyConfig probe;
    probe.workspace_root = "/";
    try {
      policy_config_from_json(parse_json_document(merged_config_json(probe, v["config"]).dump(), doc.file));
    } catch (const ConfigError& e) {
      r.fail("config." + e.field(), e.message());
    }
    c.config = v["config"];
  }

  if (r.has("approval")) {
    const Value& a = v["approval"];
    if (!a.is_object()) r.fail("approval", "must be an object");
    for (const auto& [k, _] : a.items()) {
      if (k != "approver" && k != "expect_final" && k != "expect_rules") r.fail("approval." + k, "unknown field");
    }
    ApprovalExpectation e;
    if (!a.contains("approver") || !a["approver"].is_string()) r.fail("approval.approver", "must be a string");
    e.approver = a["approver"].get<std::string>();
    if (e.approver != "approve" && e.approver != "deny" && e.approver != "unavailable") {
      r.fail("approval.approver", "must be approve, deny or unavailable");
    }
    std::string final = a.contains("expect_final") && a["expect_final"].is_string() ? a["expect_final"].get<std::string>() : "";
    if (final == "execute") {
      e.expect_final = FinalDecision::kExecute;
    } else if (final == "reject") {
      e.expect_final = FinalDecision::kReject;
    } else {
      r.fail("approval.expect_final", "must be execute or reject");
    }
    if (a.contains("expect_rules")) e.expect_rules = r.rule_list(a["expect_rules"], "approval.expect_rules");
    c.approval = std::move(e);
  }

  if (r.has("audit")) {
    if (r.string("audit") != "degraded") r.fail("audit", "only \"degraded\" is supported");
    c.audit_degraded = true;
  }

  if (metachar_of(c.category) && !c.request.find_argument("command")) {
    r.fail("request.arguments", "shell categories need a command argument");
  }
  return c;
}

ChainScenario parse_chain(const JsonDocument& doc, int line) {
  const Value& v = doc.value;
  std::string id = v.contains("id") && v["id"].is_string() ? v["id"].get<std::string>() : "";
  RecordReader r(doc, line, id);
  r.require_fields({"type", "id", "steps", "break_at", "approve", "anchor"});
  ChainScenario s;
  s.line = line;
  s.id = r.string("id");
  if (s.id.empty()) r.fail("id", "must be non-empty");
  if (!r.has("steps")) r.fail("steps", "missing required field");
  s.steps = r.strings(v["steps"], "steps");
  if (s.steps.empty()) r.fail("steps", "must name at least one case");
  if (!r.has("break_at")) r.fail("break_at", "missing required field");
  s.break_at = r.index(v["break_at"], "break_at");
  if (s.break_at >= s.steps.size()) r.fail("break_at", "must be less than the number of steps");
  if (r.has("approve")) {
    if (!v["approve"].is_array()) r.fail("approve", "must be an array of step indices");
    for (std::size_t i = 0; i < v["approve"].size(); ++i) {
      auto step = r.index(v["approve"][i], "approve." + std::to_string(i));
      if (step >= s.steps.size()) r.fail("approve." + std::to_string(i), "no such step");
      s.approve.insert(step);
    }
  }
  s.anchor = r.string("anchor");
  return s;
}

bool contains(const std::vector<std::string>& ids, const std::string& id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += sep;
    s += p;
  }
  return s;
}

std::unique_ptr<Approver> approver_for(const std::string& kind) {
  if (kind == "approve") return std::make_unique<ScriptedApprover>(std::vector{ApprovalAnswer::kApproved});
  if (kind == "deny") return std::make_unique<ScriptedApprover>(std::vector{ApprovalAnswer::kDenied});
  return nullptr;
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [value, name] : kCategoryNames) {
    if (value == c) return name;
  }
  return "unknown";
}

std::optional<Category> parse_category(std::string_view s) {
  for (const auto& [value, name] : kCategoryNames) {
    if (name == s) return value;
  }
  return std::nullopt;
}

std::optional<shell::MetacharCategory> metachar_of(Category c) {
  using M = shell::MetacharCategory;
  switch (c) {
    case Category::kShellQ: return M::kQuoting;
    case Category::kShellR: return M::kRedirection;
    case Category::kShellP: return M::kPiping;
    case Category::kShellL: return M::kLogical;
    case Category::kShellG: return M::kGlob;
    case Category::kShellB: return M::kBrackets;
    case Category::kShellSub: return M::kSubstitution;
    case Category::kShellSeq: return M::kSequencing;
    case Category::kShellLB: return M::kLineBreak;
    default: return std::nullopt;
  }
}

const CorpusCase* Corpus::find(std::string_view id) const {
  for (const auto& c : cases) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

CorpusError::CorpusError(const std::string& file, int line, const std::string& id, const std::string& field,
                         const std::string& message)
    : Error([&] {
        std::ostringstream os;
        os << file << ':' << line << ": ";
        if (!id.empty()) os << "case '" << id << "': ";
        if (!field.empty()) os << "field '" << field << "': ";
        os << message;
        return os.str();
      }()),
      id_(id),
      field_(field) {}

Corpus parse_corpus(std::string_view text, const std::string& file) {
  Corpus corpus;
  std::map<std::string, int> ids;
  std::map<std::string, int> chain_ids;
  bool have_fixture = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    JsonDocument doc;
    try {
      doc = parse_json_document(line, file);
    } catch (const ConfigError& e) {
      throw CorpusError(file, line_no, "", "", e.message());
    }
    if (!doc.value.is_object()) throw CorpusError(file, line_no, "", "", "record must be an object");
    std::string id = doc.value.contains("id") && doc.value["id"].is_string() ? doc.value["id"].get<std::string>() : "";
    // Duplicate argument keys are legitimate payloads; the pipeline rejects them.
    for (const auto& d : doc.duplicates) {
      if (d.rfind("/request/arguments/", 0) != 0) throw CorpusError(file, line_no, id, dotted(d), "duplicate key");
    }
    if (!doc.value.contains("type") || !doc.value["type"].is_string()) {
      throw CorpusError(file, line_no, id, "type", "must be case, chain or fixture");
    }
    auto type = doc.value["type"].get<std::string>();
    if (type == "case") {
      auto c = parse_case(doc, line_no);
      if (!ids.emplace(c.id, line_no).second) {
        throw CorpusError(file, line_no, c.id, "id", "duplicate case id (first on line " + std::to_string(ids[c.id]) + ")");
      }
      corpus.cases.push_back(std::move(c));
    } else if (type == "chain") {
      auto s = parse_chain(doc, line_no);
      if (!chain_ids.emplace(s.id, line_no).second) throw CorpusError(file, line_no, s.id, "id", "duplicate chain id");
      corpus.chains.push_back(std::move(s));
    } else if (type == "fixture") {
      if (have_fixture) throw CorpusError(file, line_no, "", "type", "only one fixture record is allowed");
      have_fixture = true;
      Value f = doc.value;
      f.erase("type");
      try {
        host_from_fixture(f);
      } catch (const std::exception& e) {
        throw CorpusError(file, line_no, "", "fixture", e.what());
      }
      corpus.fixture = std::move(f);
    } else {
      throw CorpusError(file, line_no, id, "type", "must be case, chain or fixture");
    }
  }
  for (const auto& s : corpus.chains) {
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      if (!corpus.find(s.steps[i])) {
        throw CorpusError(file, s.line, s.id, "steps." + std::to_string(i), "no case with id '" + s.steps[i] + "'");
      }
    }
  }
  if (corpus.fixture.is_null()) corpus.fixture = Value::object();
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(path, 0, "", "", "cannot open corpus file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str(), path);
}

Evaluator local_evaluator(const ToolCatalog& catalog, paths::HostContext host) {
  return [&catalog, host = std::move(host)](const ToolCallRequest& request, const PolicyConfig& config) {
    return evaluate(request, catalog, config, host);
  };
}

PolicyConfig effective_config(const PolicyConfig& base, const Value& overrides) {
  if (overrides.is_null() || overrides.empty()) return base;
  return policy_config_from_json(parse_json_document(merged_config_json(base, overrides).dump(), "<case config>"));
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kPass: return "pass";
    case Status::kWeaker: return "weaker";
    case Status::kStricter: return "stricter";
    case Status::kMissingRule: return "missing_rule";
    case Status::kCategoryMiss: return "category_miss";
    case Status::kApprovalMismatch: return "approval_mismatch";
    case Status::kError: return "error";
  }
  return "error";
}

std::size_t Report::failures() const {
  auto n = static_cast<std::size_t>(
      std::count_if(cases.begin(), cases.end(), [](const CaseResult& r) { return r.status != Status::kPass; }));
  n += static_cast<std::size_t>(
      std::count_if(chains.begin(), chains.end(), [](const ChainReport& c) { return !c.success; }));
  return n;
}

CaseResult run_case(const CorpusCase& c, const PolicyConfig& base, const Evaluator& evaluate) {
  CaseResult r;
  r.id = c.id;
  r.category = c.category;
  r.expected = c.expected;
  try {
    PolicyConfig config = effective_config(base, c.config);
    Verdict v = evaluate(c.request, config);
    if (c.audit_degraded) {
      auto log = AuditLog::open("/dev/full", {.fsync = true});
      audit_evaluation(*log, c.request, v);
    }
    r.actual = v.decision;
    r.rule_ids = v.rule_ids();

    if (r.actual < r.expected) {
      r.status = Status::kWeaker;
    } else if (r.actual > r.expected) {
      r.status = Status::kStricter;
    }
    if (r.status == Status::kPass) {
      std::vector<std::string> missing;
      for (const auto& id : c.expect_rules) {
        if (!contains(r.rule_ids, id)) missing.push_back(id);
      }
      if (!missing.empty()) {
        r.status = Status::kMissingRule;
        r.detail = "missing " + join(missing, ", ");
      }
    }
    if (r.status == Status::kPass) {
      shell::CategorySet want = c.expect_categories;
      if (auto m = metachar_of(c.category)) want.insert(*m);
      if (!want.empty()) {
        const Value* cmd = c.request.find_argument("command");
        shell::CategorySet got;
        if (cmd && cmd->is_string()) got = shell::analyze(cmd->get<std::string>()).categories;
        if ((got.bits() & want.bits()) != want.bits()) {
          r.status = Status::kCategoryMiss;
          r.detail = "analyzer flagged {" + got.to_string() + "}, expected {" + want.to_string() + "}";
        }
      }
    }
    if (c.approval) {
      SessionStore store;
      auto approver = approver_for(c.approval->approver);
      auto f = finalize(v, c.request, config, approver.get(), store);
      r.final_decision = f.decision;
      if (r.status == Status::kPass) {
        std::vector<std::string> hit_ids;
        for (const auto& h : f.audit_hits) hit_ids.push_back(h.rule_id);
        std::vector<std::string> missing;
        for (const auto& id : c.approval->expect_rules) {
          if (!contains(hit_ids, id)) missing.push_back(id);
        }
        if (f.decision != c.approval->expect_final || !missing.empty()) {
          r.status = Status::kApprovalMismatch;
          r.detail = std::string("final ") + std::string(tcfw::to_string(f.decision)) + ", expected " +
                     std::string(tcfw::to_string(c.approval->expect_final));
          if (!missing.empty()) r.detail += "; missing " + join(missing, ", ");
        }
      }
    }
  } catch (const std::exception& e) {
    r.status = Status::kError;
    r.detail = e.what();
  }
  return r;
}

ChainReport run_chain(const ChainScenario& scenario, const Corpus& corpus, const PolicyConfig& base,
                      const Evaluator& evaluate) {
  ChainReport report;
  report.id = scenario.id;
  report.break_at = scenario.break_at;
  SessionStore store;
  const std::string session = "chain:" + scenario.id;
  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    const CorpusCase* c = corpus.find(scenario.steps[i]);
    if (!c) throw Error("chain '" + scenario.id + "' refers to unknown case '" + scenario.steps[i] + "'");
    ToolCallRequest request = c->request;
    request.session_id = session;
    PolicyConfig config = effective_config(base, c->config);
    Verdict v = evaluate(request, config);
    ScriptedApprover user({scenario.approve.count(i) ? ApprovalAnswer::kApproved : ApprovalAnswer::kDenied});
    auto f = finalize(v, request, config, &user, store);
    report.steps.push_back({c->id, v.decision, f.decision, v.rule_ids()});
    // A rejected call ends the agent's attempt; later steps never run.
    if (f.decision == FinalDecision::kReject) {
      report.first_block = i;
      break;
    }
  }
  report.success = report.first_block && *report.first_block <= scenario.break_at;
  return report;
}

Report run_corpus(const Corpus& corpus, const PolicyConfig& base, const Evaluator& evaluate, RunOptions options) {
  Report report;
  report.cases.resize(corpus.cases.size());
  unsigned workers = std::max(1u, std::min<unsigned>(options.parallel, static_cast<unsigned>(corpus.cases.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < corpus.cases.size(); ++i) report.cases[i] = run_case(corpus.cases[i], base, evaluate);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < corpus.cases.size(); i = next++) {
          report.cases[i] = run_case(corpus.cases[i], base, evaluate);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& s : corpus.chains) {
    try {
      report.chains.push_back(run_chain(s, corpus, base, evaluate));
    } catch (const std::exception&) {
      ChainReport failed;
      failed.id = s.id;
      failed.break_at = s.break_at;
      report.chains.push_back(std::move(failed));
    }
  }
  return report;
}

namespace {

struct Tally {
  std::size_t cases = 0, pass = 0;
  std::size_t by_decision[3] = {0, 0, 0};
};

std::map<Category, Tally> tally(const Report& report) {
  std::map<Category, Tally> t;
  for (const auto& r : report.cases) {
    auto& row = t[r.category];
    ++row.cases;
    if (r.status == Status::kPass) ++row.pass;
    if (r.status != Status::kError) ++row.by_decision[static_cast<int>(r.actual)];
  }
  return t;
}

}  // namespace

std::string report_markdown(const Report& report) {
  auto rows = tally(report);
  std::size_t passed = 0;
  for (const auto& r : report.cases) passed += r.status == Status::kPass;
  std::size_t chains_ok = 0;
  for (const auto& c : report.chains) chains_ok += c.success;

  std::ostringstream os;
  os << "# Corpus report\n\n";
  os << "Cases: " << report.cases.size() << ", passed: " << passed << ", failed: " << report.cases.size() - passed
     << "\n";
  os << "Chains: " << report.chains.size() << ", blocked in time: " << chains_ok << "\n\n";

  os << "## Category x decision\n\n";
  os << "| Category | Cases | Pass | allow | require_approval | deny |\n";
  os << "|---|---:|---:|---:|---:|---:|\n";
  for (auto c : kAllCategories) {
    auto it = rows.find(c);
    if (it == rows.end()) continue;
    const auto& t = it->second;
    os << "| " << to_string(c) << " | " << t.cases << " | " << t.pass << " | " << t.by_decision[0] << " | "
       << t.by_decision[1] << " | " << t.by_decision[2] << " |\n";
  }

  os << "\n## Command parsing\n\n|";
  for (auto m : shell::kAllCategories) os << ' ' << shell::short_name(m) << " |";
  os << "\n|";
  for (std::size_t i = 0; i < shell::kAllCategories.size(); ++i) os << "---|";
  os << "\n|";
  for (auto c : kAllCategories) {
    if (!metachar_of(c)) continue;
    auto it = rows.find(c);
    if (it == rows.end() || it->second.cases == 0) {
      os << " - |";
    } else {
      os << ' ' << (it->second.pass == it->second.cases ? "✓" : "✗") << ' ' << it->second.pass << '/'
         << it->second.cases << " |";
    }
  }
  os << "\n";

  if (!report.chains.empty()) {
    os << "\n## Chains\n\n| Chain | Steps run | First block | Break at | Result |\n|---|---:|---:|---:|---|\n";
    for (const auto& c : report.chains) {
      os << "| " << c.id << " | " << c.steps.size() << " | "
         << (c.first_block ? std::to_string(*c.first_block) : "none") << " | " << c.break_at << " | "
         << (c.success ? "blocked" : "FAILED") << " |\n";
    }
  }

  std::vector<const CaseResult*> failed;
  for (const auto& r : report.cases) {
    if (r.status != Status::kPass) failed.push_back(&r);
  }
  if (!failed.empty()) {
    os << "\n## Failures\n\n";
    for (const auto* r : failed) {
      os << "- `" << r->id << "` " << to_string(r->status) << ": expected " << tcfw::to_string(r->expected)
         << ", got " << tcfw::to_string(r->actual);
      if (!r->rule_ids.empty()) os << " [" << join(r->rule_ids, ", ") << "]";
      if (!r->detail.empty()) os << " (" << r->detail << ")";
      os << "\n";
    }
  }
  return os.str();
}

Value report_json(const Report& report) {
  auto rows = tally(report);
  std::size_t passed = 0;
  for (const auto& r : report.cases) passed += r.status == Status::kPass;

  Value j;
  j["summary"] = {{"cases", report.cases.size()},
                  {"passed", passed},
                  {"failed", report.cases.size() - passed},
                  {"chains", report.chains.size()},
                  {"failures", report.failures()}};
  Value matrix = Value::object();
  for (auto c : kAllCategories) {
    auto it = rows.find(c);
    if (it == rows.end()) continue;
    const auto& t = it->second;
    matrix[std::string(to_string(c))] = {{"cases", t.cases},
                                         {"pass", t.pass},
                                         {"allow", t.by_decision[0]},
                                         {"require_approval", t.by_decision[1]},
                                         {"deny", t.by_decision[2]}};
  }
  j["matrix"] = matrix;
  Value cases = Value::array();
  for (const auto& r : report.cases) {
    Value e;
    e["id"] = r.id;
    e["category"] = to_string(r.category);
    e["expected"] = tcfw::to_string(r.expected);
    e["actual"] = tcfw::to_string(r.actual);
    e["status"] = to_string(r.status);
    e["rule_ids"] = r.rule_ids;
    if (r.final_decision) e["final"] = tcfw::to_string(*r.final_decision);
    if (!r.detail.empty()) e["detail"] = r.detail;
    cases.push_back(std::move(e));
  }
  j["cases"] = std::move(cases);
  Value chains = Value::array();
  for (const auto& c : report.chains) {
    Value e;
    e["id"] = c.id;
    e["break_at"] = c.break_at;
    e["first_block"] = c.first_block ? Value(*c.first_block) : Value(nullptr);
    e["success"] = c.success;
    Value steps = Value::array();
    for (const auto& s : c.steps) {
      steps.push_back({{"case", s.case_id},
                       {"decision", tcfw::to_string(s.decision)},
                       {"final", tcfw::to_string(s.final_decision)},
                       {"rule_ids", s.rule_ids}});
    }
    e["steps"] = std::move(steps);
    chains.push_back(std::move(e));
  }
  j["chains"] = std::move(chains);
  return j;
}

}  // namespace tcfw::corpus
