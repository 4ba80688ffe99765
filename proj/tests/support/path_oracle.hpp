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

// Independent symlink resolver plus the randomized containment property
// built on it. Shared by the unit and acceptance suites.

#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tcfw/paths.hpp"
#include "tcfw/rules.hpp"

namespace oracle {

using tcfw::paths::FsEntry;
using tcfw::paths::InMemoryFilesystem;

inline std::vector<std::string> split_path(const std::string& p) {
  std::vector<std::string> parts;
  std::stringstream ss(p);
  for (std::string part; std::getline(ss, part, '/');) parts.push_back(part);
  return parts;
}

// Recursive: resolves each link target as a whole path before continuing.
inline std::string resolve(const std::vector<std::string>& comps, const InMemoryFilesystem& fs, int& budget) {
  std::string cur = "/";
  auto parent = [](const std::string& p) {
    auto slash = p.find_last_of('/');
    return slash == 0 ? std::string("/") : p.substr(0, slash);
  };
  for (const auto& c : comps) {
    if (c.empty() || c == ".") continue;
    if (c == "..") {
      cur = parent(cur);
      continue;
    }
    std::string cand = cur == "/" ? "/" + c : cur + "/" + c;
    auto e = fs.lookup(cand);
    if (e.kind != FsEntry::Kind::kSymlink) {
      cur = cand;
      continue;
    }
    if (--budget < 0) throw tcfw::paths::SymlinkLoop(cand);
    std::string base = !e.target.empty() && e.target[0] == '/' ? e.target : cur + "/" + e.target;
    cur = resolve(split_path(base), fs, budget);
  }
  return cur;
}

// Generates `filesystems` random trees of files, directories and symlinks
// around a workspace at /ws and checks four requests against each. `fail`
// receives a description of every violation. Returns the number of requests
// whose containment was compared against the resolver.
template <typename Fail>
int random_symlink_property(unsigned seed, int filesystems, Fail&& fail) {
  using namespace tcfw::paths;
  std::mt19937 rng(seed);
  const std::vector<std::string> names = {"a", "b", "c", "ws", "out"};
  const std::vector<std::string> roots = {"/ws", "/ws/a", "/out", "/", "/ws/b/c"};
  const std::vector<std::string> rel_targets = {"..", ".", "../..", "a", "b/c", "../out", "../../out/a",
                                                "../ws", "c/..", "../../../.."};
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  tcfw::PolicyConfig cfg;
  cfg.workspace_root = "/ws";
  int checked = 0;
  for (int n = 0; n < filesystems; ++n) {
    auto fs = std::make_shared<InMemoryFilesystem>();
    fs->add_dir("/ws").add_dir("/out");
    int entries = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < entries; ++k) {
      std::string p = pick(roots);
      p += (p == "/" ? "" : "/") + pick(names);
      switch (rng() % 3) {
        case 0: fs->add_file(p); break;
        case 1: fs->add_dir(p); break;
        default: {
          std::string t = rng() % 2 ? pick(rel_targets) : pick(roots) + "/" + pick(names);
          fs->add_symlink(p, t);
        }
      }
    }
    HostContext host;
    host.fs = fs;
    host.home = "/home/u";
    for (int q = 0; q < 4; ++q) {
      std::string path = rng() % 2 ? "/ws" : "";
      int depth = 1 + static_cast<int>(rng() % 4);
      for (int k = 0; k < depth; ++k) {
        if (!path.empty() || k > 0) path += "/";
        int r = static_cast<int>(rng() % 7);
        path += r == 0 ? ".." : r == 1 ? "." : pick(names);
      }
      auto op = rng() % 2 ? Operation::kRead : Operation::kWrite;
      auto [d, v] = decide(op, path, cfg, host);

      std::string joined = path[0] == '/' ? path : "/ws/" + path;
      int budget = kMaxSymlinkResolutions;
      std::string expected;
      bool loop = false;
      try {
        expected = resolve(split_path(joined), *fs, budget);
      } catch (const SymlinkLoop&) {
        loop = true;
      }
      if (loop) {
        if (!v.has_rule(tcfw::rules::kPathLoop)) fail(path + ": loop not reported");
        continue;
      }
      if (d.canonical != expected) {
        fail(path + ": canonical " + d.canonical + " != " + expected);
        continue;
      }
      // The workspace root is itself resolved before containment.
      int root_budget = kMaxSymlinkResolutions;
      std::string root = "/ws";
      try {
        root = resolve({"", "ws"}, *fs, root_budget);
      } catch (const SymlinkLoop&) {
      }
      bool inside = root == "/" || expected == root || expected.rfind(root + "/", 0) == 0;
      bool classified_inside = d.op_class == FileOperationClass::kReadInside ||
                               d.op_class == FileOperationClass::kWriteInside;
      if (classified_inside != inside) fail(path + " -> " + expected + ": containment mismatch");
      if (classified_inside && !inside && v.decision == tcfw::Decision::kAllow) {
        fail(path + " -> " + expected + ": escape allowed");
      }
      // Fixpoint: one more resolution pass changes nothing.
      if (canonicalize(d.canonical, *fs) != d.canonical) fail(path + ": canonical form is not a fixpoint");
      ++checked;
    }
  }
  return checked;
}

}  // namespace oracle
