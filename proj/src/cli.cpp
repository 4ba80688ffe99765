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


#include "tcfw/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <charconv>
#include <iostream>

#include "CLI11.hpp"
#include "tcfw/corpus.hpp"
#include "tcfw/gateway.hpp"
#include "tcfw/pipeline.hpp"
#include "tcfw/serialization.hpp"
#include "tcfw/shell.hpp"

namespace tcfw {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct CheckOptions {
  std::string config, catalog, tool, request, fixture, origin, session;
  std::vector<std::string> args, raw;
  bool json = false;
};

struct ServeOptions {
  std::string config, catalog, listen = "127.0.0.1:8731", audit, fixture;
  bool audit_fsync = false;
};

struct CorpusOptions {
  std::string file, config, catalog, report = "md";
  unsigned parallel = 1;
  bool http = false;
};

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError(std::string(flag) + " expects key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

// Typed parameters accept their natural spelling; anything that does not
// convert stays a string so schema validation reports it.
Value coerce(const ToolSpec* spec, const std::string& key, const std::string& text) {
  const ParamSpec* p = spec ? spec->find_parameter(key) : nullptr;
  if (!p) return text;
  switch (p->kind) {
    case ParamKind::kInteger: {
      std::int64_t n = 0;
      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
      if (ec == std::errc() && end == text.data() + text.size() && !text.empty()) return n;
      break;
    }
    case ParamKind::kBoolean:
      if (text == "true") return true;
      if (text == "false") return false;
      break;
    case ParamKind::kList: {
      auto parsed = Value::parse(text, nullptr, false);
      if (parsed.is_array()) return parsed;
      break;
    }
    case ParamKind::kString:
      break;
  }
  return text;
}

std::string require_config(const std::string& flag) {
  auto path = resolve_config_path(flag);
  if (path.empty()) throw UsageError("--config is required (or set FIREWALL_CONFIG)");
  return path;
}

paths::HostContext host_for(const std::string& fixture) {
  if (fixture.empty()) return paths::HostContext::from_process();
  auto doc = read_json_file(fixture);
  try {
    return host_from_fixture(doc.value);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), "", fixture);
  }
}

void print_verdict(std::ostream& out, const Verdict& v) {
  out << "decision: " << to_string(v.decision) << "\n";
  for (const auto& h : v.rule_hits) {
    out << "  " << h.rule_id << ": " << h.message;
    if (!h.evidence.empty()) out << " [" << h.evidence << "]";
    out << "\n";
  }
}

int cmd_check(const CheckOptions& o, std::ostream& out) {
  if (o.catalog.empty()) throw UsageError("--catalog is required");
  auto config = load_policy_config(require_config(o.config));
  auto catalog = load_catalog(o.catalog);

  ToolCallRequest request;
  if (!o.request.empty()) {
    if (!o.tool.empty() || !o.args.empty() || !o.raw.empty()) {
      throw UsageError("--request cannot be combined with --tool, --arg or --raw");
    }
    auto doc = read_json_file(o.request);
    try {
      request = request_from_json(doc);
    } catch (const WireError& e) {
      throw UsageError(o.request + ": " + (e.field().empty() ? "" : "field '" + e.field() + "': ") + e.what());
    }
  } else {
    if (o.tool.empty()) throw UsageError("--tool or --request is required");
    request.tool_name = o.tool;
    const ToolSpec* spec = catalog.find(o.tool);
    for (const auto& a : o.args) {
      auto [k, v] = split_assignment(a, "--arg");
      request.arguments.emplace_back(k, coerce(spec, k, v));
    }
    for (const auto& a : o.raw) {
      auto [k, v] = split_assignment(a, "--raw");
      request.raw_model_fields[k] = v;
    }
    if (!o.origin.empty()) {
      auto kind = parse_origin_kind(o.origin);
      if (!kind) throw UsageError("unknown --origin '" + o.origin + "'");
      request.origin.kind = *kind;
    }
  }
  if (!o.session.empty()) request.session_id = o.session;

  Verdict v = evaluate(request, catalog, config, host_for(o.fixture));
  if (o.json) {
    out << verdict_to_json(v).dump() << "\n";
  } else {
    print_verdict(out, v);
  }
  return exit_code_for(v.decision);
}

int cmd_validate(const std::string& config_flag, const std::string& catalog_path, std::ostream& out) {
  auto config = load_policy_config(require_config(config_flag));
  ToolCatalog catalog;
  if (!catalog_path.empty()) catalog = load_catalog(catalog_path);
  out << "ok: policy_digest " << policy_digest(config, catalog) << "\n";
  return 0;
}

int cmd_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
  GatewayOptions g;
  g.config_path = require_config(o.config);
  g.catalog_path = o.catalog;
  if (g.catalog_path.empty()) throw UsageError("--catalog is required");
  auto colon = o.listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen expects host:port");
  g.host = o.listen.substr(0, colon);
  if (g.host.size() > 1 && g.host.front() == '[' && g.host.back() == ']') g.host = g.host.substr(1, g.host.size() - 2);
  auto port_text = o.listen.substr(colon + 1);
  auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), g.port);
  if (ec != std::errc() || end != port_text.data() + port_text.size() || g.port < 0 || g.port > 65535) {
    throw UsageError("bad port in --listen '" + o.listen + "'");
  }
  g.audit_path = o.audit;
  g.audit_fsync = o.audit_fsync;
  g.fs_fixture_path = o.fixture;
  if (g.host != "127.0.0.1" && g.host != "localhost" && g.host != "::1") {
    err << "warning: listening on non-loopback address " << g.host << " without authentication\n";
  }

  // Block the stop signals before any server thread exists so every thread
  // inherits the mask and sigwait below receives them.
  sigset_t stop_signals, previous;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, &previous);
  struct Restore {
    sigset_t* mask;
    ~Restore() { pthread_sigmask(SIG_SETMASK, mask, nullptr); }
  } restore{&previous};

  Gateway gateway(g);
  int port = gateway.start();
  out << "listening on " << g.host << ":" << port << " policy_digest " << gateway.snapshot()->digest << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  gateway.stop();
  return 0;
}

int cmd_corpus(const CorpusOptions& o, std::ostream& out) {
  if (o.catalog.empty()) throw UsageError("--catalog is required");
  if (o.report != "md" && o.report != "json") throw UsageError("--report must be md or json");
  auto corpus = corpus::load_corpus(o.file);
  auto config = load_policy_config(require_config(o.config));
  auto catalog = load_catalog(o.catalog);
  corpus::RunOptions run{.parallel = std::max(1u, o.parallel)};
  corpus::Report report;
  if (o.http) {
    GatewayPool pool(o.catalog, corpus.fixture);
    report = corpus::run_corpus(corpus, config, pool.evaluator(), run);
  } else {
    report = corpus::run_corpus(corpus, config, corpus::local_evaluator(catalog, host_from_fixture(corpus.fixture)), run);
  }
  if (o.report == "json") {
    out << corpus::report_json(report).dump(2) << "\n";
  } else {
    out << corpus::report_markdown(report);
  }
  return report.ok() ? 0 : kExitCorpusFailures;
}

int cmd_analyze(const std::string& command, std::ostream& out) {
  auto a = shell::analyze(command);
  Value cats = Value::array();
  for (auto c : a.categories.members()) cats.push_back(shell::short_name(c));
  Value commands = Value::array();
  for (const auto& c : shell::flatten_commands(a)) commands.push_back(c.argv_text());
  out << Value{{"categories", cats},
               {"parse_complete", a.parse_complete},
               {"residue", a.has_residue()},
               {"commands", commands}}
             .dump()
      << "\n";
  return 0;
}

}  // namespace

int exit_code_for(Decision d) {
  switch (d) {
    case Decision::kAllow: return kExitAllow;
    case Decision::kRequireApproval: return kExitRequireApproval;
    case Decision::kDeny: return kExitDeny;
  }
  return kExitDeny;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Policy firewall for coding-agent tool calls", "firewall"};
  app.require_subcommand(1);

  CheckOptions check;
  auto* check_cmd = app.add_subcommand("check", "Evaluate one tool call");
  check_cmd->add_option("--config", check.config, "Policy config (JSON)");
  check_cmd->add_option("--catalog", check.catalog, "Tool catalog (JSON)");
  check_cmd->add_option("--tool", check.tool, "Tool name");
  check_cmd->add_option("--arg", check.args, "Argument key=value (repeatable)");
  check_cmd->add_option("--raw", check.raw, "Extra model field key=value (repeatable)");
  check_cmd->add_option("--origin", check.origin, "Origin kind of the content that produced the call");
  check_cmd->add_option("--session", check.session, "Session id");
  check_cmd->add_option("--request", check.request, "Wire-format request file instead of --tool/--arg");
  check_cmd->add_option("--fs-fixture", check.fixture, "Declarative filesystem (JSON) instead of the real one");
  check_cmd->add_flag("--json", check.json, "Print the verdict as JSON");

  std::string validate_config, validate_catalog;
  auto* config_cmd = app.add_subcommand("config", "Config utilities");
  config_cmd->require_subcommand(1);
  auto* validate_cmd = config_cmd->add_subcommand("validate", "Check a policy config (and catalog)");
  validate_cmd->add_option("--config", validate_config, "Policy config (JSON)");
  validate_cmd->add_option("--catalog", validate_catalog, "Tool catalog (JSON)");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP gateway");
  serve_cmd->add_option("--config", serve.config, "Policy config (JSON)");
  serve_cmd->add_option("--catalog", serve.catalog, "Tool catalog (JSON)");
  serve_cmd->add_option("--listen", serve.listen, "host:port (port 0 picks one)");
  serve_cmd->add_option("--audit", serve.audit, "Audit log (JSONL, appended)");
  serve_cmd->add_flag("--audit-fsync", serve.audit_fsync, "fsync every audit line");
  serve_cmd->add_option("--fs-fixture", serve.fixture, "Declarative filesystem (JSON) instead of the real one");

  CorpusOptions corpus;
  auto* corpus_cmd = app.add_subcommand("corpus", "Attack corpus");
  corpus_cmd->require_subcommand(1);
  auto* run_cmd = corpus_cmd->add_subcommand("run", "Replay a corpus and report");
  run_cmd->add_option("file", corpus.file, "Corpus (JSONL)")->required();
  run_cmd->add_option("--config", corpus.config, "Policy config (JSON)");
  run_cmd->add_option("--catalog", corpus.catalog, "Tool catalog (JSON)");
  run_cmd->add_option("--report", corpus.report, "md or json");
  run_cmd->add_option("--parallel", corpus.parallel, "Worker threads for cases");
  run_cmd->add_flag("--http", corpus.http, "Evaluate through loopback gateways");

  std::string command;
  auto* analyze_cmd = app.add_subcommand("analyze", "Show how a command line is parsed");
  analyze_cmd->add_option("command", command, "Command line")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (check_cmd->parsed()) return cmd_check(check, out);
    if (validate_cmd->parsed()) return cmd_validate(validate_config, validate_catalog, out);
    if (serve_cmd->parsed()) return cmd_serve(serve, out, err);
    if (run_cmd->parsed()) return cmd_corpus(corpus, out);
    if (analyze_cmd->parsed()) return cmd_analyze(command, out);
  } catch (const UsageError& e) {
    err << "firewall: " << e.what() << "\n";
  } catch (const Error& e) {
    err << "firewall: " << e.what() << "\n";
  }
  return kExitUsage;
}

}  // namespace tcfw
