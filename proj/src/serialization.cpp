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


#include "tcfw/serialization.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <vector>

namespace tcfw {

namespace {

int line_at(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Walks text nlohmann has already accepted and records member positions.
class PositionScanner {
 public:
  PositionScanner(std::string_view text, JsonDocument& doc) : text_(text), doc_(doc) {}

  void run() {
    doc_.lines[""] = line_at(text_, skip_ws(0));
    std::size_t i = 0;
    while (i < text_.size()) {
      char c = text_[i];
      if (c == '"') {
        std::size_t end = string_end(i);
        if (!frames_.empty() && frames_.back().object && frames_.back().expect_key) {
          auto key = nlohmann::json::parse(text_.substr(i, end - i)).get<std::string>();
          auto& f = frames_.back();
          f.key = key;
          f.expect_key = false;
          std::string ptr = f.path + "/" + pointer_escape(key);
          if (f.keys.insert(key).second) {
            doc_.lines.emplace(ptr, line);
          } else if (doc_.duplicates.insert(ptr).second) {
            doc_.lines[ptr] = line;
          }
        } else {
          value_start();
        }
        i = end;
        continue;
      }
      if (c == '\n') ++line;
      if (c == '{' || c == '[') {
        std::string path = value_start();
        frames_.push_back({c == '{', c == '{', path, {}, 0, {}});
      } else if (c == '}' || c == ']') {
        frames_.pop_back();
      } else if (c == ',') {
        if (!frames_.empty() && frames_.back().object) frames_.back().expect_key = true;
      } else if (c != ':' && c != ' ' && c != '\t' && c != '\r' && c != '\n') {
        value_start();
        while (i + 1 < text_.size() && std::string_view(",]} \t\r\n").find(text_[i + 1]) == std::string_view::npos) ++i;
      }
      ++i;
    }
  }

 private:
  struct Frame {
    bool object;
    bool expect_key;
    std::string path;
    std::string key;
    std::size_t index;
    std::set<std::string> keys;
  };

  std::size_t skip_ws(std::size_t i) const {
    while (i < text_.size() && std::string_view(" \t\r\n").find(text_[i]) != std::string_view::npos) ++i;
    return i;
  }

  std::size_t string_end(std::size_t i) {
    for (std::size_t j = i + 1; j < text_.size(); ++j) {
      if (text_[j] == '\\') {
        ++j;
      } else if (text_[j] == '"') {
        return j + 1;
      }
    }
    return text_.size();
  }

  std::string value_start() {
    if (frames_.empty()) return "";
    auto& f = frames_.back();
    if (f.object) return f.path + "/" + pointer_escape(f.key);
    std::string ptr = f.path + "/" + std::to_string(f.index++);
    doc_.lines.emplace(ptr, line);
    return ptr;
  }

  std::string_view text_;
  JsonDocument& doc_;
  std::vector<Frame> frames_;

 public:
  int line = 1;
};

std::string hex_sha256(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

// Typed field access with diagnostics.
class Reader {
 public:
  Reader(const JsonDocument& doc, std::string pointer) : doc_(doc), ptr_(std::move(pointer)) {
    node_ = &doc_.value.at(nlohmann::ordered_json::json_pointer(ptr_));
  }

  const Value& node() const { return *node_; }
  const std::string& pointer() const { return ptr_; }

  void require_object(std::initializer_list<std::string_view> allowed) const {
    if (!node_->is_object()) doc_.fail(ptr_, "expected an object");
    for (const auto& [k, v] : node_->items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        doc_.fail(child(k), "unknown field '" + k + "'");
      }
    }
  }

  bool has(std::string_view key) const { return node_->contains(key); }
  std::string child(std::string_view key) const { return ptr_ + "/" + pointer_escape(key); }
  Reader sub(std::string_view key) const { return Reader(doc_, child(key)); }

  std::string string(std::string_view key) const {
    const auto& v = (*node_)[std::string(key)];
    if (!v.is_string()) doc_.fail(child(key), "expected a string");
    return v.get<std::string>();
  }
  bool boolean(std::string_view key) const {
    const auto& v = (*node_)[std::string(key)];
    if (!v.is_boolean()) doc_.fail(child(key), "expected true or false");
    return v.get<bool>();
  }
  std::size_t positive(std::string_view key) const {
    const auto& v = (*node_)[std::string(key)];
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) doc_.fail(child(key), "expected a positive integer");
    return v.get<std::size_t>();
  }
  double number(std::string_view key) const {
    const auto& v = (*node_)[std::string(key)];
    if (!v.is_number()) doc_.fail(child(key), "expected a number");
    return v.get<double>();
  }
  std::vector<std::string> strings(std::string_view key) const {
    const auto& v = (*node_)[std::string(key)];
    if (!v.is_array()) doc_.fail(child(key), "expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) doc_.fail(child(key) + "/" + std::to_string(i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }
  template <typename E>
  E enumeration(std::string_view key, std::optional<E> (*parse)(std::string_view), std::string_view choices) const {
    auto s = string(key);
    auto e = parse(s);
    if (!e) doc_.fail(child(key), "invalid value '" + s + "' (expected " + std::string(choices) + ")");
    return *e;
  }

 private:
  const JsonDocument& doc_;
  std::string ptr_;
  const Value* node_;
};

}  // namespace

std::string pointer_escape(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

int JsonDocument::line_of(const std::string& pointer) const {
  std::string p = pointer;
  for (;;) {
    auto it = lines.find(p);
    if (it != lines.end()) return it->second;
    if (p.empty()) return 0;
    p = p.substr(0, p.rfind('/'));
  }
}

void JsonDocument::fail(const std::string& pointer, const std::string& message) const {
  std::string field = pointer.empty() ? "" : pointer.substr(1);
  std::replace(field.begin(), field.end(), '/', '.');
  throw ConfigError(message, field, file, line_of(pointer));
}

JsonDocument parse_json_document(std::string_view text, const std::string& file) {
  JsonDocument doc;
  doc.file = file;
  try {
    doc.value = Value::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string what = e.what();
    auto colon = what.find("syntax error");
    throw ConfigError(colon == std::string::npos ? what : what.substr(colon), "", file,
                      line_at(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  PositionScanner scanner(text, doc);
  scanner.run();
  return doc;
}

JsonDocument read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file", "", path, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_document(ss.str(), path);
}

PolicyConfig policy_config_from_json(const JsonDocument& doc) {
  if (!doc.duplicates.empty()) doc.fail(*doc.duplicates.begin(), "duplicate key");
  Reader r(doc, "");
  r.require_object({"workspace_root", "approval_mode", "command_allowlist", "command_denylist",
                    "protected_relative_paths", "outside_read_policy", "outside_write_policy",
                    "fetch_host_allowlist", "secret_patterns", "max_query_param_length", "strict_argv0",
                    "shell_dialect", "strip_fields", "entropy_heuristic", "entropy_min_length",
                    "entropy_bits_per_char"});
  PolicyConfig c;
  if (!r.has("workspace_root")) doc.fail("", "missing required field 'workspace_root'");
  c.workspace_root = r.string("workspace_root");
  if (r.has("approval_mode")) {
    c.approval_mode = r.enumeration<ApprovalMode>("approval_mode", parse_approval_mode, "always_ask or auto_approve");
  }
  auto entry_list = [&](std::string_view key, std::vector<AllowlistEntry>& out) {
    if (!r.has(key)) return;
    auto list = r.strings(key);
    out.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      try {
        out.push_back(AllowlistEntry::parse(list[i]));
      } catch (const Error& e) {
        doc.fail(r.child(key) + "/" + std::to_string(i), e.what());
      }
    }
  };
  entry_list("command_allowlist", c.command_allowlist);
  entry_list("command_denylist", c.command_denylist);
  if (r.has("protected_relative_paths")) c.protected_relative_paths = r.strings("protected_relative_paths");
  if (r.has("outside_read_policy")) {
    c.outside_read_policy = r.enumeration<OutsidePolicy>("outside_read_policy", parse_outside_policy, "deny or require_approval");
  }
  if (r.has("outside_write_policy")) {
    c.outside_write_policy = r.enumeration<OutsidePolicy>("outside_write_policy", parse_outside_policy, "deny or require_approval");
  }
  if (r.has("fetch_host_allowlist")) c.fetch_host_allowlist = r.strings("fetch_host_allowlist");
  if (r.has("secret_patterns")) {
    const auto& list = r.node()["secret_patterns"];
    if (!list.is_array()) doc.fail(r.child("secret_patterns"), "expected a list");
    c.secret_patterns.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      Reader p(doc, r.child("secret_patterns") + "/" + std::to_string(i));
      p.require_object({"name", "pattern", "action"});
      if (!p.has("name") || !p.has("pattern")) doc.fail(p.pointer(), "secret pattern needs name and pattern");
      Decision action = Decision::kDeny;
      if (p.has("action")) {
        action = p.enumeration<Decision>("action", parse_decision, "deny or require_approval");
        if (action == Decision::kAllow) doc.fail(p.child("action"), "action must be deny or require_approval");
      }
      try {
        c.secret_patterns.push_back(SecretPattern::make(p.string("name"), p.string("pattern"), action));
      } catch (const ConfigError& e) {
        doc.fail(p.child("pattern"), e.message());
      }
    }
  }
  if (r.has("max_query_param_length")) c.max_query_param_length = r.positive("max_query_param_length");
  if (r.has("strict_argv0")) c.strict_argv0 = r.boolean("strict_argv0");
  if (r.has("shell_dialect")) {
    c.shell_dialect = r.enumeration<ShellDialect>("shell_dialect", parse_shell_dialect, "posix, cmd or powershell");
  }
  if (r.has("strip_fields")) c.strip_fields = r.strings("strip_fields");
  if (r.has("entropy_heuristic")) c.entropy_heuristic = r.boolean("entropy_heuristic");
  if (r.has("entropy_min_length")) c.entropy_min_length = r.positive("entropy_min_length");
  if (r.has("entropy_bits_per_char")) c.entropy_bits_per_char = r.number("entropy_bits_per_char");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    doc.fail("/" + e.field(), e.message());
  }
  return c;
}

PolicyConfig load_policy_config(const std::string& path) { return policy_config_from_json(read_json_file(path)); }

Value policy_config_to_json(const PolicyConfig& c) {
  Value j;
  j["workspace_root"] = c.workspace_root;
  j["approval_mode"] = to_string(c.approval_mode);
  auto entry_strings = [](const std::vector<AllowlistEntry>& list) {
    Value a = Value::array();
    for (const auto& e : list) a.push_back(e.to_string());
    return a;
  };
  j["command_allowlist"] = entry_strings(c.command_allowlist);
  j["command_denylist"] = entry_strings(c.command_denylist);
  j["protected_relative_paths"] = c.protected_relative_paths;
  j["outside_read_policy"] = to_string(c.outside_read_policy);
  j["outside_write_policy"] = to_string(c.outside_write_policy);
  j["fetch_host_allowlist"] = c.fetch_host_allowlist;
  Value patterns = Value::array();
  for (const auto& p : c.secret_patterns) {
    patterns.push_back({{"name", p.name}, {"pattern", p.pattern}, {"action", to_string(p.action)}});
  }
  j["secret_patterns"] = patterns;
  j["max_query_param_length"] = c.max_query_param_length;
  j["strict_argv0"] = c.strict_argv0;
  j["shell_dialect"] = to_string(c.shell_dialect);
  j["strip_fields"] = c.strip_fields;
  j["entropy_heuristic"] = c.entropy_heuristic;
  j["entropy_min_length"] = c.entropy_min_length;
  j["entropy_bits_per_char"] = c.entropy_bits_per_char;
  return j;
}

std::string policy_digest(const PolicyConfig& config, const ToolCatalog& catalog) {
  Value j = {{"config", policy_config_to_json(config)}, {"catalog", catalog_to_json(catalog)}};
  return hex_sha256(j.dump());
}

ToolCatalog catalog_from_json(const JsonDocument& doc) {
  if (!doc.duplicates.empty()) doc.fail(*doc.duplicates.begin(), "duplicate key");
  Reader root(doc, "");
  root.require_object({"tools"});
  if (!root.has("tools") || !root.node()["tools"].is_array()) doc.fail("/tools", "expected a list of tools");
  std::vector<ToolSpec> tools;
  std::map<std::string, std::string> seen;
  const auto& list = root.node()["tools"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    Reader t(doc, "/tools/" + std::to_string(i));
    t.require_object({"name", "capability", "enabled", "parameters", "approval_required", "subject_argument"});
    if (!t.has("name")) doc.fail(t.pointer(), "tool needs a name");
    ToolSpec spec;
    spec.name = t.string("name");
    if (spec.name.empty()) doc.fail(t.child("name"), "tool name must be non-empty");
    if (!seen.emplace(spec.name, t.pointer()).second) doc.fail(t.child("name"), "duplicate tool name '" + spec.name + "'");
    if (!t.has("capability")) doc.fail(t.pointer(), "tool needs a capability");
    spec.capability = t.enumeration<Capability>(
        "capability", parse_capability, "file_read, file_write, terminal, web_fetch, web_search, render or other");
    if (t.has("enabled")) spec.enabled = t.boolean("enabled");
    if (t.has("approval_required")) spec.approval_required = t.boolean("approval_required");
    if (t.has("subject_argument")) spec.subject_argument = t.string("subject_argument");
    if (t.has("parameters")) {
      const auto& params = t.node()["parameters"];
      if (!params.is_array()) doc.fail(t.child("parameters"), "expected a list of parameters");
      std::set<std::string> names;
      for (std::size_t k = 0; k < params.size(); ++k) {
        Reader p(doc, t.child("parameters") + "/" + std::to_string(k));
        p.require_object({"name", "kind", "required"});
        if (!p.has("name") || !p.has("kind")) doc.fail(p.pointer(), "parameter needs name and kind");
        ParamSpec ps;
        ps.name = p.string("name");
        if (ps.name.empty()) doc.fail(p.child("name"), "parameter name must be non-empty");
        if (!names.insert(ps.name).second) doc.fail(p.child("name"), "duplicate parameter '" + ps.name + "'");
        ps.kind = p.enumeration<ParamKind>("kind", parse_param_kind, "string, integer, boolean or list");
        if (p.has("required")) ps.required = p.boolean("required");
        spec.parameters.push_back(ps);
      }
    }
    if (spec.capability != Capability::kOther && !spec.find_parameter(spec.subject())) {
      doc.fail(t.pointer(), "tool '" + spec.name + "' does not declare its subject parameter '" + spec.subject() + "'");
    }
    tools.push_back(std::move(spec));
  }
  return ToolCatalog(std::move(tools));
}

ToolCatalog load_catalog(const std::string& path) { return catalog_from_json(read_json_file(path)); }

Value catalog_to_json(const ToolCatalog& catalog) {
  Value tools = Value::array();
  for (const auto& [name, t] : catalog.tools()) {
    Value params = Value::array();
    for (const auto& p : t.parameters) {
      params.push_back({{"name", p.name}, {"kind", to_string(p.kind)}, {"required", p.required}});
    }
    Value j = {{"name", t.name},
               {"capability", to_string(t.capability)},
               {"enabled", t.enabled},
               {"parameters", params},
               {"approval_required", t.approval_required}};
    if (!t.subject_argument.empty()) j["subject_argument"] = t.subject_argument;
    tools.push_back(j);
  }
  return {{"tools", tools}};
}

ToolCallRequest request_from_json(const JsonDocument& doc, const std::string& base) {
  const Value& v = base.empty() ? doc.value : doc.value.at(Value::json_pointer(base));
  auto bad = [](const std::string& field, const std::string& why) -> WireError { return WireError(why, field); };
  if (!v.is_object()) throw bad("", "request must be a JSON object");
  for (const auto& [k, _] : v.items()) {
    if (k != "session_id" && k != "tool_name" && k != "arguments" && k != "origin" && k != "raw_model_fields") {
      throw bad(k, "unknown field '" + k + "'");
    }
  }
  for (const auto& d : doc.duplicates) {
    if (d.rfind(base + "/", 0) == 0 && d.rfind(base + "/arguments/", 0) != 0) {
      throw bad(d.substr(base.size() + 1), "duplicate key");
    }
  }
  ToolCallRequest r;
  if (!v.contains("tool_name") || !v["tool_name"].is_string()) throw bad("tool_name", "tool_name must be a string");
  r.tool_name = v["tool_name"].get<std::string>();
  if (v.contains("session_id")) {
    if (!v["session_id"].is_string()) throw bad("session_id", "session_id must be a string");
    r.session_id = v["session_id"].get<std::string>();
  }
  if (v.contains("arguments")) {
    const auto& args = v["arguments"];
    if (!args.is_object()) throw bad("arguments", "arguments must be an object");
    for (const auto& [k, value] : args.items()) {
      r.arguments.emplace_back(k, value);
      // Keep the duplicate visible so evaluation rejects it.
      if (doc.duplicates.count(base + "/arguments/" + pointer_escape(k))) r.arguments.emplace_back(k, value);
    }
  }
  if (v.contains("origin")) {
    const auto& o = v["origin"];
    if (!o.is_object()) throw bad("origin", "origin must be an object");
    if (o.contains("kind")) {
      auto kind = o["kind"].is_string() ? parse_origin_kind(o["kind"].get<std::string>()) : std::nullopt;
      if (!kind) throw bad("origin.kind", "unknown origin kind");
      r.origin.kind = *kind;
    }
    if (o.contains("detail")) {
      if (!o["detail"].is_string()) throw bad("origin.detail", "origin.detail must be a string");
      r.origin.detail = o["detail"].get<std::string>();
    }
  }
  if (v.contains("raw_model_fields")) {
    const auto& raw = v["raw_model_fields"];
    if (!raw.is_object()) throw bad("raw_model_fields", "raw_model_fields must be an object");
    for (const auto& [k, value] : raw.items()) {
      r.raw_model_fields[k] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  return r;
}

ToolCallRequest request_from_json(const Value& value) {
  JsonDocument doc;
  doc.value = value;
  return request_from_json(doc);
}

Value request_to_json(const ToolCallRequest& r) {
  Value args = Value::object();
  for (const auto& [k, v] : r.arguments) args[k] = v;
  Value j;
  j["session_id"] = r.session_id;
  j["tool_name"] = r.tool_name;
  j["arguments"] = args;
  j["origin"] = {{"kind", to_string(r.origin.kind)}, {"detail", r.origin.detail}};
  j["raw_model_fields"] = r.raw_model_fields;
  return j;
}

std::string request_to_wire(const ToolCallRequest& r) {
  Value j = request_to_json(r);
  if (!r.has_duplicate_arguments()) return j.dump();
  // A JSON object cannot hold the repeated key, so write the members by hand.
  std::string args = "{";
  for (std::size_t i = 0; i < r.arguments.size(); ++i) {
    if (i) args += ',';
    args += Value(r.arguments[i].first).dump() + ':' + r.arguments[i].second.dump();
  }
  args += '}';
  j["arguments"] = "\x01";
  std::string text = j.dump();
  auto at = text.find("\"\\u0001\"");
  return text.replace(at, 8, args);
}

Value verdict_to_json(const Verdict& verdict) {
  Value hits = Value::array();
  for (const auto& h : verdict.rule_hits) {
    hits.push_back({{"rule_id", h.rule_id}, {"message", h.message}, {"evidence", h.evidence}});
  }
  Value j;
  j["decision"] = to_string(verdict.decision);
  j["rule_hits"] = hits;
  if (verdict.sanitized_request) j["sanitized_request"] = request_to_json(*verdict.sanitized_request);
  return j;
}

Verdict verdict_from_json(const Value& j) {
  Verdict v;
  auto d = parse_decision(j.at("decision").get<std::string>());
  if (!d) throw Error("unknown decision");
  v.decision = *d;
  for (const auto& h : j.at("rule_hits")) {
    v.rule_hits.push_back({h.at("rule_id").get<std::string>(), h.value("message", ""), h.value("evidence", "")});
  }
  if (j.contains("sanitized_request")) v.sanitized_request = request_from_json(j["sanitized_request"]);
  return v;
}

paths::HostContext host_from_fixture(const Value& fixture) {
  auto fs = std::make_shared<paths::InMemoryFilesystem>();
  paths::HostContext host;
  if (!fixture.is_object()) throw Error("fixture must be an object");
  for (const auto& [k, _] : fixture.items()) {
    if (k != "entries" && k != "home" && k != "cwd" && k != "env") throw Error("unknown fixture field '" + k + "'");
  }
  if (fixture.contains("entries")) {
    for (const auto& [path, e] : fixture["entries"].items()) {
      if (path.empty() || path[0] != '/') throw Error("fixture path must be absolute: '" + path + "'");
      std::string kind = e.is_string() ? e.get<std::string>() : e.value("kind", "");
      if (kind == "file") {
        fs->add_file(path);
      } else if (kind == "dir") {
        fs->add_dir(path);
      } else if (kind == "symlink" && e.is_object() && e.contains("target") && e["target"].is_string()) {
        fs->add_symlink(path, e["target"].get<std::string>());
      } else {
        throw Error("bad fixture entry for '" + path + "'");
      }
    }
  }
  host.fs = fs;
  host.home = fixture.value("home", "");
  host.cwd = fixture.value("cwd", "");
  if (fixture.contains("env")) {
    for (const auto& [k, v] : fixture["env"].items()) host.env[k] = v.get<std::string>();
  }
  return host;
}

}  // namespace tcfw
