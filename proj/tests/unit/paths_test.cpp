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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "path_oracle.hpp"
#include "tcfw/paths.hpp"
#include "tcfw/rules.hpp"

namespace tcfw::paths {
namespace {

PolicyConfig ws_config() {
  PolicyConfig c;
  c.workspace_root = "/ws";
  return c;
}

HostContext host_with(std::shared_ptr<InMemoryFilesystem> fs) {
  HostContext h;
  h.fs = std::move(fs);
  h.home = "/home/u";
  h.env = {{"APPDATA", "C:\\Users\\u\\AppData\\Roaming"}, {"PROJ", "/ws/src"}, {"HOME", "/home/u"}};
  return h;
}

TEST(PathExpand, Examples) {
  std::map<std::string, std::string> env = {{"APPDATA", "C:\\Users\\u\\AppData\\Roaming"}};
  auto t = expand("~/.ssh/id_rsa", env, "/home/u", "/ws");
  EXPECT_EQ(t.normalized, "/home/u/.ssh/id_rsa");
  EXPECT_EQ(t.form, PathForm::kTilde);

  auto r = expand("src/main.c", env, "/home/u", "/ws");
  EXPECT_EQ(r.normalized, "/ws/src/main.c");
  EXPECT_EQ(r.form, PathForm::kRelative);

  auto e = expand("%APPDATA%\\x", env, "/home/u", "/ws");
  EXPECT_EQ(e.form, PathForm::kEnvVar);
  EXPECT_TRUE(e.foreign);
  EXPECT_EQ(e.normalized, "C:/Users/u/AppData/Roaming/x");
}

TEST(PathExpand, WindowsForms) {
  std::map<std::string, std::string> env;
  auto unc = expand("\\\\server\\share\\f", env, "/h", "/ws");
  EXPECT_EQ(unc.form, PathForm::kUnc);
  EXPECT_EQ(unc.normalized, "//server/share/f");
  auto dev = expand("\\\\.\\PhysicalDrive0", env, "/h", "/ws");
  EXPECT_EQ(dev.form, PathForm::kDevice);
  auto drv = expand("c:\\Windows\\..\\Temp", env, "/h", "/ws");
  EXPECT_EQ(drv.form, PathForm::kDriveLetter);
  EXPECT_EQ(drv.normalized, "C:/Temp");
}

TEST(PathExpand, UnresolvableVariables) {
  std::map<std::string, std::string> env;
  EXPECT_THROW(expand("$NOPE/x", env, "/h", "/ws"), UnresolvableEnvVar);
  EXPECT_THROW(expand("%NOPE%\\x", env, "/h", "/ws"), UnresolvableEnvVar);
  EXPECT_THROW(expand("~bob/x", env, "/h", "/ws"), UnresolvableEnvVar);
  auto lit = expand("a$b", env, "/h", "/ws");
  EXPECT_EQ(lit.normalized, "/ws/a$b");
}

TEST(PathCanonicalize, Examples) {
  InMemoryFilesystem fs;
  fs.add_symlink("/ws/link", "/etc/passwd").add_file("/etc/passwd");
  fs.add_dir("/ws/a/b");
  fs.add_symlink("/ws/l1", "l2").add_symlink("/ws/l2", "/out/x");
  EXPECT_EQ(canonicalize("/ws/link", fs), "/etc/passwd");
  EXPECT_EQ(canonicalize("/ws/a/b", fs), "/ws/a/b");
  EXPECT_EQ(canonicalize("/ws/l1", fs), "/out/x");
}

TEST(PathCanonicalize, DotDotAppliesAfterResolution) {
  InMemoryFilesystem fs;
  fs.add_symlink("/ws/d", "/out/deep/dir");
  fs.add_dir("/out/deep/dir");
  // Lexically /ws/d/.. is /ws; physically it is /out/deep.
  EXPECT_EQ(canonicalize("/ws/d/..", fs), "/out/deep");
  EXPECT_EQ(canonicalize("/ws/d/../../secret", fs), "/out/secret");
}

TEST(PathCanonicalize, MissingTailUnderSymlinkedParent) {
  InMemoryFilesystem fs;
  fs.add_symlink("/ws/cfg", "/etc");
  fs.add_dir("/etc");
  EXPECT_EQ(canonicalize("/ws/cfg/new/file.txt", fs), "/etc/new/file.txt");
}

TEST(PathCanonicalize, LoopsThrow) {
  InMemoryFilesystem fs;
  fs.add_symlink("/ws/a", "b").add_symlink("/ws/b", "a");
  EXPECT_THROW(canonicalize("/ws/a", fs), SymlinkLoop);
  fs.add_symlink("/ws/self", "/ws/self/x");
  EXPECT_THROW(canonicalize("/ws/self", fs), SymlinkLoop);
}

TEST(PathGlob, Patterns) {
  EXPECT_TRUE(glob_match("**/mcp.json", "mcp.json"));
  EXPECT_TRUE(glob_match("**/mcp.json", ".cursor/mcp.json"));
  EXPECT_TRUE(glob_match(".cursor/**", ".cursor/rules/x"));
  EXPECT_TRUE(glob_match(".clinerules*", ".clinerules"));
  EXPECT_TRUE(glob_match(".clinerules*", ".CLINERULES-extra"));
  EXPECT_TRUE(glob_match("**/*.rules", "a/b/c.rules"));
  EXPECT_FALSE(glob_match("*.rules", "a/c.rules"));
  EXPECT_FALSE(glob_match(".vscode/settings.json", ".vscode/settings.jsonx"));
  EXPECT_TRUE(is_protected(".clinerules/x.md", PolicyConfig::default_protected_paths()));
  EXPECT_FALSE(is_protected("src/main.c", PolicyConfig::default_protected_paths()));
}

TEST(PathDecide, Examples) {
  auto fs = std::make_shared<InMemoryFilesystem>();
  fs->add_file("/ws/README.md").add_dir("/ws/.vscode").add_dir("/ws/.cursor");
  fs->add_symlink("/ws/link", "~/.ssh/id_rsa");
  fs->add_symlink("/ws/keylink", "/home/u/.ssh/id_rsa");
  auto host = host_with(fs);
  auto cfg = ws_config();

  auto [d1, v1] = decide(Operation::kWrite, "/ws/.vscode/settings.json", cfg, host);
  EXPECT_EQ(v1.decision, Decision::kRequireApproval);
  EXPECT_TRUE(v1.has_rule(rules::kPathProtected));
  EXPECT_TRUE(d1.is_protected);

  auto [d2, v2] = decide(Operation::kWrite, "/ws/.cursor/mcp.json", cfg, host);
  EXPECT_TRUE(v2.has_rule(rules::kPathProtected));

  auto [d3, v3] = decide(Operation::kRead, "/ws/keylink", cfg, host);
  EXPECT_EQ(d3.op_class, FileOperationClass::kReadOutside);
  EXPECT_EQ(d3.canonical, "/home/u/.ssh/id_rsa");
  EXPECT_EQ(v3.decision, Decision::kRequireApproval);

  auto [d4, v4] = decide(Operation::kRead, "/ws/README.md", cfg, host);
  EXPECT_EQ(v4.decision, Decision::kAllow);
  EXPECT_EQ(d4.op_class, FileOperationClass::kReadInside);
}

TEST(PathDecide, DefaultMatrix) {
  auto fs = std::make_shared<InMemoryFilesystem>();
  fs->add_file("/ws/src/main.c").add_file("/etc/passwd");
  fs->add_symlink("/ws/in_link", "src/main.c");
  fs->add_symlink("/ws/out_link", "/etc/passwd");
  auto host = host_with(fs);
  auto cfg = ws_config();
  struct Case {
    Operation op;
    const char* path;
    FileOperationClass cls;
    Decision expected;
  };
  const Case cases[] = {
      {Operation::kRead, "/ws/src/main.c", FileOperationClass::kReadInside, Decision::kAllow},
      {Operation::kRead, "src/main.c", FileOperationClass::kReadInside, Decision::kAllow},
      {Operation::kRead, "/ws/in_link", FileOperationClass::kReadInside, Decision::kAllow},
      {Operation::kWrite, "/ws/src/main.c", FileOperationClass::kWriteInside, Decision::kAllow},
      {Operation::kWrite, "src/main.c", FileOperationClass::kWriteInside, Decision::kAllow},
      {Operation::kWrite, "/ws/in_link", FileOperationClass::kWriteInside, Decision::kAllow},
      {Operation::kRead, "/etc/passwd", FileOperationClass::kReadOutside, Decision::kRequireApproval},
      {Operation::kRead, "../etc/passwd", FileOperationClass::kReadOutside, Decision::kRequireApproval},
      {Operation::kRead, "/ws/out_link", FileOperationClass::kReadOutside, Decision::kRequireApproval},
      {Operation::kWrite, "/etc/passwd", FileOperationClass::kWriteOutside, Decision::kDeny},
      {Operation::kWrite, "../etc/passwd", FileOperationClass::kWriteOutside, Decision::kDeny},
      {Operation::kWrite, "/ws/out_link", FileOperationClass::kWriteOutside, Decision::kDeny},
  };
  for (const auto& c : cases) {
    auto [d, v] = decide(c.op, c.path, cfg, host);
    EXPECT_EQ(d.op_class, c.cls) << c.path;
    EXPECT_EQ(v.decision, c.expected) << c.path;
  }
}

TEST(PathDecide, SpecialFormsAndErrors) {
  auto fs = std::make_shared<InMemoryFilesystem>();
  fs->add_symlink("/ws/loop", "/ws/loop");
  auto host = host_with(fs);
  auto cfg = ws_config();
  EXPECT_TRUE(decide(Operation::kRead, "$NOPE/x", cfg, host).second.has_rule(rules::kPathUnresolved));
  EXPECT_EQ(decide(Operation::kRead, "$NOPE/x", cfg, host).second.decision, Decision::kDeny);
  EXPECT_TRUE(decide(Operation::kRead, "/ws/loop", cfg, host).second.has_rule(rules::kPathLoop));
  for (const char* p : {"\\\\srv\\share\\x", "C:\\x", "\\\\.\\PhysicalDrive0", "%APPDATA%\\x"}) {
    auto [d, v] = decide(Operation::kWrite, p, cfg, host);
    EXPECT_EQ(d.op_class, FileOperationClass::kWriteOutside) << p;
    EXPECT_EQ(v.decision, Decision::kDeny) << p;
  }
  auto [d, v] = decide(Operation::kRead, "$PROJ/main.c", cfg, host);
  EXPECT_EQ(d.form, PathForm::kEnvVar);
  EXPECT_EQ(v.decision, Decision::kAllow);
  // A mid-path reference is judged both literally and expanded.
  auto [d2, v2] = decide(Operation::kWrite, "sub/$HOME/.bashrc", cfg, host);
  EXPECT_EQ(v2.decision, Decision::kAllow);
  auto [d3, v3] = decide(Operation::kWrite, "../ws/${HOME}/../../../etc/x", cfg, host);
  EXPECT_EQ(v3.decision, Decision::kDeny);
}

TEST(PathDecide, ProtectedWritesNeverAllow) {
  auto fs = std::make_shared<InMemoryFilesystem>();
  fs->add_symlink("/ws/innocent", ".vscode/settings.json");
  fs->add_symlink("/ws/rules_dir", ".cursor");
  auto host = host_with(fs);
  auto cfg = ws_config();
  for (const char* p :
       {".vscode/settings.json", ".VSCode/Settings.JSON", ".vscode/tasks.json", "mcp.json",
        "a/b/mcp.json", ".cursor/rules/x.mdc", ".clinerules", ".clinerules/y.md", "team.rules",
        "x/y.rules", ".agent/memory.md", "innocent", "rules_dir/mcp.json", "./.vscode/./settings.json"}) {
    auto [d, v] = decide(Operation::kWrite, p, cfg, host);
    EXPECT_NE(v.decision, Decision::kAllow) << p;
  }
}

TEST(PathDecide, RealFilesystemSymlinkEscape) {
  auto base = std::filesystem::temp_directory_path() / ("tcfw_paths_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base / "ws");
  std::filesystem::create_directories(base / "out");
  std::ofstream(base / "out" / "secret") << "x";
  std::filesystem::create_symlink(base / "out" / "secret", base / "ws" / "link");
  PolicyConfig cfg;
  cfg.workspace_root = std::filesystem::weakly_canonical(base / "ws").string();
  auto host = HostContext::from_process();
  auto [d, v] = decide(Operation::kWrite, cfg.workspace_root + "/link", cfg, host);
  EXPECT_EQ(d.op_class, FileOperationClass::kWriteOutside);
  EXPECT_EQ(v.decision, Decision::kDeny);
  std::filesystem::remove_all(base);
}

TEST(PathProperties, RandomSymlinkFilesystemsNeverEscape) {
  int failures = 0;
  int checked = oracle::random_symlink_property(20261018, 10000, [&](const std::string& msg) {
    if (++failures <= 10) ADD_FAILURE() << msg;
  });
  EXPECT_EQ(failures, 0);
  EXPECT_GT(checked, 30000);
}

}  // namespace
}  // namespace tcfw::paths
