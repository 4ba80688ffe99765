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
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "tcfw/cli.hpp"
#include "tcfw/corpus.hpp"
#include "tcfw/gateway.hpp"
#include "tcfw/serialization.hpp"

namespace tcfw {
namespace {

const std::string kSource = TCFW_SOURCE_DIR;
const std::string kPolicy = kSource + "/config/reference-policy.json";
const std::string kCatalog = kSource + "/config/reference-catalog.json";
const std::string kCorpus = kSource + "/corpus/reference.jsonl";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::string t = (std::filesystem::temp_directory_path() / "tcfw-cli-XXXXXX").string();
    path_ = mkdtemp(t.data());
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    auto p = path_ + "/" + name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  std::string path_;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { ::unsetenv("FIREWALL_CONFIG"); }
};

TEST_F(Cli, ReadInsideWorkspaceAllows) {
  TempDir dir;
  auto fixture = dir.write("fs.json", R"({"entries": {"/home/dev/project/src/a.c": "file"}, "cwd": "/home/dev/project"})");
  auto r = cli({"check", "--config", kPolicy, "--catalog", kCatalog, "--tool", "read_file", "--arg", "path=src/a.c",
                "--fs-fixture", fixture});
  EXPECT_EQ(r.code, kExitAllow) << r.err;
  EXPECT_EQ(r.out, "decision: allow\n");
}

TEST_F(Cli, CommentTrickNeedsApproval) {
  TempDir dir;
  auto cfg = dir.write("echo.json", R"({"workspace_root": "/home/dev/project", "command_allowlist": ["echo"]})");
  auto r = cli({"check", "--config", cfg, "--catalog", kCatalog, "--tool", "execute_command", "--arg",
                "command=rm -rf * # echo"});
  EXPECT_EQ(r.code, kExitRequireApproval);
  EXPECT_NE(r.out.find("SHELL.UNCOVERED: command 'rm' is not on the allowlist"), std::string::npos) << r.out;
}

TEST_F(Cli, FileSchemeDenied) {
  auto r = cli({"check", "--config", kPolicy, "--catalog", kCatalog, "--tool", "fetch", "--arg",
                "url=file:///etc/shadow", "--json"});
  EXPECT_EQ(r.code, kExitDeny);
  auto j = Value::parse(r.out);
  EXPECT_EQ(j["decision"], "deny");
  EXPECT_EQ(j["rule_hits"][0]["rule_id"], "EXFIL.SCHEME");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
}

TEST_F(Cli, TypedArgumentsFollowTheSchema) {
  auto base = std::vector<std::string>{"check", "--config", kPolicy, "--catalog", kCatalog, "--tool", "execute_command",
                                       "--arg", "command=pwd"};
  auto ok = base;
  ok.insert(ok.end(), {"--arg", "timeout=30"});
  EXPECT_EQ(cli(ok).code, kExitAllow);
  auto bad = base;
  bad.insert(bad.end(), {"--arg", "timeout=soon"});
  auto r = cli(bad);
  EXPECT_EQ(r.code, kExitDeny);
  EXPECT_NE(r.out.find("TOOL.SCHEMA"), std::string::npos);
  auto dup = base;
  dup.insert(dup.end(), {"--arg", "command=rm -rf /"});
  r = cli(dup);
  EXPECT_EQ(r.code, kExitDeny);
  EXPECT_NE(r.out.find("CORE.MALFORMED"), std::string::npos);
}

TEST_F(Cli, RawFieldsAreStrippedNotTrusted) {
  auto r = cli({"check", "--config", kPolicy, "--catalog", kCatalog, "--tool", "execute_command", "--arg",
                "command=rm -rf build", "--raw", "requires_approval=false", "--origin", "directory_listing"});
  EXPECT_EQ(r.code, kExitRequireApproval);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"check", "--config", kPolicy, "--catalog", kCatalog, "--tool", "x", "--arg", "novalue"}).code, kExitUsage);
  EXPECT_EQ(cli({"check", "--config", kPolicy, "--tool", "x"}).code, kExitUsage);
  EXPECT_EQ(cli({"check", "--catalog", kCatalog, "--tool", "x"}).code, kExitUsage);
  EXPECT_EQ(cli({"check", "--config", kPolicy, "--catalog", kCatalog}).code, kExitUsage);
  EXPECT_EQ(cli({"check", "--config", kPolicy, "--catalog", kCatalog, "--tool", "x", "--origin", "mars"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(Cli, ConfigErrorsNameFileLineField) {
  TempDir dir;
  auto cfg = dir.write("bad.json", "{\n  \"workspace_root\": \"/w\",\n  \"outside_read_policy\": \"shrug\"\n}\n");
  auto r = cli({"check", "--config", cfg, "--catalog", kCatalog, "--tool", "read_file", "--arg", "path=x"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find(cfg + ":3: field 'outside_read_policy'"), std::string::npos) << r.err;
  r = cli({"config", "validate", "--config", cfg});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find(cfg + ":3:"), std::string::npos) << r.err;
}

TEST_F(Cli, ConfigValidate) {
  auto r = cli({"config", "validate", "--config", kPolicy, "--catalog", kCatalog});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "ok: policy_digest " + policy_digest(load_policy_config(kPolicy), load_catalog(kCatalog)) + "\n");
}

TEST_F(Cli, EnvironmentConfigWins) {
  TempDir dir;
  auto empty = dir.write("empty.json", R"({"workspace_root": "/w", "command_allowlist": []})");
  ::setenv("FIREWALL_CONFIG", empty.c_str(), 1);
  auto r = cli({"check", "--config", kPolicy, "--catalog", kCatalog, "--tool", "execute_command", "--arg", "command=ls"});
  ::unsetenv("FIREWALL_CONFIG");
  EXPECT_EQ(r.code, kExitRequireApproval);
  EXPECT_NE(r.out.find("SHELL.EMPTY_ALLOWLIST"), std::string::npos);
}

TEST_F(Cli, CorpusRunReports) {
  auto md = cli({"corpus", "run", kCorpus, "--config", kPolicy, "--catalog", kCatalog});
  EXPECT_EQ(md.code, 0) << md.out;
  EXPECT_NE(md.out.find("| Category | Cases | Pass |"), std::string::npos);
  auto json = cli({"corpus", "run", kCorpus, "--config", kPolicy, "--catalog", kCatalog, "--report", "json", "--parallel", "4"});
  EXPECT_EQ(json.code, 0);
  EXPECT_EQ(Value::parse(json.out)["summary"]["failures"], 0);
  auto again = cli({"corpus", "run", kCorpus, "--config", kPolicy, "--catalog", kCatalog, "--report", "json"});
  EXPECT_EQ(again.out, json.out);
  EXPECT_EQ(cli({"corpus", "run", kCorpus, "--config", kPolicy, "--catalog", kCatalog, "--report", "xml"}).code, kExitUsage);
}

TEST_F(Cli, CorpusRunFailuresAndParseErrors) {
  TempDir dir;
  auto weak = dir.write("weak.jsonl",
                        R"({"type":"case","id":"w","category":"PathEscape","request":{"tool_name":"read_file","arguments":{"path":"a"}},"expected":"deny","anchor":""})"
                        "\n");
  EXPECT_EQ(cli({"corpus", "run", weak, "--config", kPolicy, "--catalog", kCatalog}).code, kExitCorpusFailures);
  auto broken = dir.write("broken.jsonl",
                          R"({"type":"case","id":"b","category":"Nope","request":{"tool_name":"x"},"expected":"deny","anchor":""})"
                          "\n");
  auto r = cli({"corpus", "run", broken, "--config", kPolicy, "--catalog", kCatalog});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("case 'b': field 'category'"), std::string::npos) << r.err;
}

TEST_F(Cli, Analyze) {
  auto r = cli({"analyze", "echo `rm -rf *`"});
  EXPECT_EQ(r.code, 0);
  auto j = Value::parse(r.out);
  EXPECT_EQ(j["categories"], Value::parse(R"(["G","Sub"])"));
  EXPECT_EQ(j["commands"], Value::parse(R"([["echo","`rm -rf *`"],["rm","-rf","*"]])"));
}

TEST_F(Cli, ServeRefusesBadStartup) {
  TempDir dir;
  auto cfg = dir.write("bad.json", "{\n  \"workspace_root\": 7\n}\n");
  auto r = cli({"serve", "--config", cfg, "--catalog", kCatalog, "--listen", "127.0.0.1:0"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find(cfg + ":2: field 'workspace_root'"), std::string::npos) << r.err;
  r = cli({"serve", "--config", kPolicy, "--catalog", kCatalog, "--listen", "127.0.0.1:0", "--audit", "/nonexistent-dir/a.log"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("/nonexistent-dir/a.log"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"serve", "--config", kPolicy, "--catalog", kCatalog, "--listen", "nope"}).code, kExitUsage);
}

// Starts the real binary, talks to it, stops it with SIGTERM.
TEST_F(Cli, ServeProcessLifecycle) {
  TempDir dir;
  std::string audit = dir.write("audit.jsonl", "");
  int out_pipe[2];
  ASSERT_EQ(pipe(out_pipe), 0);
  pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    close(out_pipe[0]);
    execl(TCFW_FIREWALL_BIN, "firewall", "serve", "--config", kPolicy.c_str(), "--catalog", kCatalog.c_str(),
          "--listen", "127.0.0.1:0", "--audit", audit.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(out_pipe[1]);
  std::string banner;
  char ch;
  while (read(out_pipe[0], &ch, 1) == 1 && ch != '\n') banner += ch;
  close(out_pipe[0]);
  ASSERT_EQ(banner.rfind("listening on 127.0.0.1:", 0), 0u) << banner;
  int port = std::stoi(banner.substr(std::string("listening on 127.0.0.1:").size()));

  httplib::Client c("127.0.0.1", port);
  auto health = c.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(Value::parse(health->body)["status"], "ok");
  auto res = c.Post("/v1/check", R"({"tool_name":"execute_command","arguments":{"command":"echo hi\nrm -rf /"}})",
                    "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(Value::parse(res->body)["decision"], "require_approval");

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  auto records = read_audit_log(audit);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].decision, "require_approval");
}

// For every corpus case the CLI exit class matches the decision the HTTP
// gateway returns for the same request, policy and catalog.
TEST_F(Cli, WireCliEquivalenceOverCorpus) {
  auto corpus = corpus::load_corpus(kCorpus);
  auto base = load_policy_config(kPolicy);
  TempDir dir;
  auto fixture = dir.write("fixture.json", corpus.fixture.dump());
  GatewayPool pool(kCatalog, corpus.fixture);
  auto http = pool.evaluator();
  int n = 0;
  for (const auto& c : corpus.cases) {
    auto config = corpus::effective_config(base, c.config);
    auto cfg_path = dir.write("policy.json", policy_config_to_json(config).dump());
    auto req_path = dir.write("request.json", request_to_wire(c.request));
    auto r = cli({"check", "--config", cfg_path, "--catalog", kCatalog, "--request", req_path, "--fs-fixture", fixture,
                  "--json"});
    Verdict wire = http(c.request, config);
    EXPECT_EQ(r.code, exit_code_for(wire.decision)) << c.id << "\n" << r.err;
    auto j = Value::parse(r.out);
    EXPECT_EQ(j["decision"], to_string(wire.decision)) << c.id;
    EXPECT_EQ(verdict_from_json(j).rule_ids(), wire.rule_ids()) << c.id;
    ++n;
  }
  EXPECT_EQ(n, static_cast<int>(corpus.cases.size()));
}

}  // namespace
}  // namespace tcfw
