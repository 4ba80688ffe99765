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

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcfw/types.hpp"

namespace tcfw::paths {

inline constexpr int kMaxSymlinkResolutions = 40;

enum class FileOperationClass { kReadInside, kWriteInside, kReadOutside, kWriteOutside };
enum class PathForm { kAbsolute, kRelative, kTilde, kEnvVar, kUnc, kDriveLetter, kDevice };
enum class Operation { kRead, kWrite };

// "R_I", "W_I", "R_O", "W_O".
std::string_view to_string(FileOperationClass c);
std::string_view to_string(PathForm f);

struct FsEntry {
  enum class Kind { kFile, kDir, kSymlink, kMissing };
  Kind kind = Kind::kMissing;
  std::string target;  // symlinks only
};

// Read-only view of a filesystem. Lookups never follow the final component.
class FilesystemView {
 public:
  virtual ~FilesystemView() = default;
  virtual FsEntry lookup(const std::string& absolute_path) const = 0;
};

// Declarative filesystem for tests and fixtures. Parent directories of every
// entry exist implicitly.
class InMemoryFilesystem : public FilesystemView {
 public:
  InMemoryFilesystem& add_file(std::string path);
  InMemoryFilesystem& add_dir(std::string path);
  InMemoryFilesystem& add_symlink(std::string path, std::string target);

  FsEntry lookup(const std::string& absolute_path) const override;
  const std::map<std::string, FsEntry>& entries() const { return entries_; }

 private:
  std::map<std::string, FsEntry> entries_;
};

// lstat(2)/readlink(2) backed view.
class RealFilesystem : public FilesystemView {
 public:
  FsEntry lookup(const std::string& absolute_path) const override;
};

// Everything path decisions need to know about the host.
struct HostContext {
  std::shared_ptr<const FilesystemView> fs;
  std::map<std::string, std::string> env;
  std::string home;
  // Empty means the workspace root.
  std::string cwd;

  static HostContext from_process();
};

class UnresolvableEnvVar : public Error {
 public:
  explicit UnresolvableEnvVar(const std::string& name)
      : Error("cannot resolve '" + name + "' in path"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class SymlinkLoop : public Error {
 public:
  explicit SymlinkLoop(const std::string& path)
      : Error("too many symbolic links resolving '" + path + "'") {}
};

struct Expansion {
  // Absolute path with '.' and '..' still in place; the input to
  // canonicalize().
  std::string joined;
  // Lexically normalized form ('.'/'..' collapsed).
  std::string normalized;
  PathForm form = PathForm::kAbsolute;
  // UNC, drive-letter and device paths never live under a POSIX workspace.
  bool foreign = false;
};

// Expands tilde, leading $VAR / ${VAR} / %VAR% references, relative paths,
// and recognizes Windows path forms. Backslashes count as separators.
Expansion expand(std::string_view path, const std::map<std::string, std::string>& env,
                 std::string_view home, std::string_view cwd);

// Resolves every symlink component, including the final one, walking
// components left to right so that '..' applies to the resolved parent.
// Missing components are kept as-is once no further lookup can succeed.
std::string canonicalize(std::string_view absolute_path, const FilesystemView& fs);

std::string lexical_normalize(std::string_view absolute_path);

// Glob over '/'-separated paths: '**' spans any number of segments, '*' and
// '?' stay within a segment. ASCII case-insensitive.
bool glob_match(std::string_view pattern, std::string_view path);

// True when `relative` or any of its ancestors matches one of `patterns`.
bool is_protected(std::string_view relative, const std::vector<std::string>& patterns);

bool is_inside(std::string_view canonical, std::string_view root);

struct PathDecision {
  std::string requested;
  std::string expanded;
  std::string canonical;
  FileOperationClass op_class = FileOperationClass::kReadOutside;
  bool is_protected = false;
  PathForm form = PathForm::kAbsolute;
};

std::pair<PathDecision, Verdict> decide(Operation op, std::string_view path,
                                        const PolicyConfig& config, const HostContext& host);

}  // namespace tcfw::paths
