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

#include "tcfw/paths.hpp"

#include <sys/stat.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <deque>
#include <optional>

#include "tcfw/rules.hpp"

extern char** environ;

namespace tcfw::paths {

namespace {

std::vector<std::string> split(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= path.size()) {
    auto j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) out.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::size_t n) {
  if (n == 0) return "/";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += '/';
    out += parts[i];
  }
  return out;
}

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct EnvRef {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string name;
};

// Recognizes $NAME, ${NAME} or %NAME% at `pos`.
std::optional<EnvRef> env_ref_at(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return std::nullopt;
  if (s[pos] == '$') {
    if (pos + 1 < s.size() && s[pos + 1] == '{') {
      auto close = s.find('}', pos + 2);
      if (close == std::string_view::npos || close == pos + 2) return std::nullopt;
      auto name = s.substr(pos + 2, close - pos - 2);
      if (!is_name_start(name[0])) return std::nullopt;
      for (char c : name) {
        if (!is_name_char(c)) return std::nullopt;
      }
      return EnvRef{pos, close + 1, std::string(name)};
    }
    std::size_t e = pos + 1;
    if (e >= s.size() || !is_name_start(s[e])) return std::nullopt;
    while (e < s.size() && is_name_char(s[e])) ++e;
    return EnvRef{pos, e, std::string(s.substr(pos + 1, e - pos - 1))};
  }
  if (s[pos] == '%') {
    auto close = s.find('%', pos + 1);
    if (close == std::string_view::npos || close == pos + 1) return std::nullopt;
    auto name = s.substr(pos + 1, close - pos - 1);
    for (char c : name) {
      if (!is_name_char(c) && c != '(' && c != ')') return std::nullopt;
    }
    return EnvRef{pos, close + 1, std::string(name)};
  }
  return std::nullopt;
}

const std::string* env_lookup(const std::map<std::string, std::string>& env,
                              const std::string& name) {
  if (auto it = env.find(name); it != env.end()) return &it->second;
  // Windows variable names are case-insensitive.
  for (const auto& [k, v] : env) {
    if (k.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < k.size() && same; ++i) {
      same = std::tolower(static_cast<unsigned char>(k[i])) ==
             std::tolower(static_cast<unsigned char>(name[i]));
    }
    if (same) return &v;
  }
  return nullptr;
}

// Expands every non-leading reference that resolves; unresolvable ones stay
// literal. Returns nullopt when nothing changed.
std::optional<std::string> expand_embedded(std::string_view path,
                                           const std::map<std::string, std::string>& env) {
  std::string out;
  bool changed = false;
  std::size_t i = 0;
  while (i < path.size()) {
    if (i > 0) {
      if (auto ref = env_ref_at(path, i)) {
        if (const auto* v = env_lookup(env, ref->name)) {
          out += *v;
          i = ref->end;
          changed = true;
          continue;
        }
      }
    }
    out += path[i++];
  }
  if (!changed) return std::nullopt;
  return out;
}

bool ieq(char a, char b) {
  return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
}

bool segment_match(std::string_view pat, std::string_view s) {
  std::size_t p = 0, i = 0, star_p = std::string_view::npos, star_i = 0;
  while (i < s.size()) {
    if (p < pat.size() && (pat[p] == '?' || (pat[p] != '*' && ieq(pat[p], s[i])))) {
      ++p;
      ++i;
    } else if (p < pat.size() && pat[p] == '*') {
      star_p = p++;
      star_i = i;
    } else if (star_p != std::string_view::npos) {
      p = star_p + 1;
      i = ++star_i;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

bool glob_segments(const std::vector<std::string>& pat, std::size_t pi,
                   const std::vector<std::string>& path, std::size_t si) {
  while (pi < pat.size()) {
    if (pat[pi] == "**") {
      for (std::size_t k = si; k <= path.size(); ++k) {
        if (glob_segments(pat, pi + 1, path, k)) return true;
      }
      return false;
    }
    if (si >= path.size() || !segment_match(pat[pi], path[si])) return false;
    ++pi;
    ++si;
  }
  return si == path.size();
}

std::string normalize_foreign(std::string prefix, std::string_view rest) {
  std::vector<std::string> parts;
  for (auto& c : split(rest)) {
    if (c == ".") continue;
    if (c == "..") {
      if (!parts.empty()) parts.pop_back();
      continue;
    }
    parts.push_back(std::move(c));
  }
  for (const auto& p : parts) {
    if (prefix.empty() || prefix.back() != '/') prefix += '/';
    prefix += p;
  }
  return prefix;
}

}  // namespace

std::string_view to_string(FileOperationClass c) {
  switch (c) {
    case FileOperationClass::kReadInside: return "R_I";
    case FileOperationClass::kWriteInside: return "W_I";
    case FileOperationClass::kReadOutside: return "R_O";
    case FileOperationClass::kWriteOutside: return "W_O";
  }
  return "?";
}

std::string_view to_string(PathForm f) {
  switch (f) {
    case PathForm::kAbsolute: return "Absolute";
    case PathForm::kRelative: return "Relative";
    case PathForm::kTilde: return "Tilde";
    case PathForm::kEnvVar: return "EnvVar";
    case PathForm::kUnc: return "UNC";
    case PathForm::kDriveLetter: return "DriveLetter";
    case PathForm::kDevice: return "Device";
  }
  return "?";
}

InMemoryFilesystem& InMemoryFilesystem::add_file(std::string path) {
  entries_[lexical_normalize(path)] = {FsEntry::Kind::kFile, {}};
  return *this;
}

InMemoryFilesystem& InMemoryFilesystem::add_dir(std::string path) {
  entries_[lexical_normalize(path)] = {FsEntry::Kind::kDir, {}};
  return *this;
}

InMemoryFilesystem& InMemoryFilesystem::add_symlink(std::string path, std::string target) {
  entries_[lexical_normalize(path)] = {FsEntry::Kind::kSymlink, std::move(target)};
  return *this;
}

FsEntry InMemoryFilesystem::lookup(const std::string& absolute_path) const {
  if (absolute_path == "/") return {FsEntry::Kind::kDir, {}};
  if (auto it = entries_.find(absolute_path); it != entries_.end()) return it->second;
  // Implicit parent directory of some declared entry.
  std::string prefix = absolute_path + "/";
  auto it = entries_.lower_bound(prefix);
  if (it != entries_.end() && it->first.compare(0, prefix.size(), prefix) == 0) {
    return {FsEntry::Kind::kDir, {}};
  }
  return {};
}

FsEntry RealFilesystem::lookup(const std::string& absolute_path) const {
  struct stat st {};
  if (::lstat(absolute_path.c_str(), &st) != 0) return {};
  if (S_ISLNK(st.st_mode)) {
    std::string buf(static_cast<std::size_t>(st.st_size > 0 ? st.st_size : 256) + 1, '\0');
    for (;;) {
      auto n = ::readlink(absolute_path.c_str(), buf.data(), buf.size());
      if (n < 0) return {};
      if (static_cast<std::size_t>(n) < buf.size()) {
        buf.resize(static_cast<std::size_t>(n));
        return {FsEntry::Kind::kSymlink, buf};
      }
      buf.resize(buf.size() * 2);
    }
  }
  if (S_ISDIR(st.st_mode)) return {FsEntry::Kind::kDir, {}};
  return {FsEntry::Kind::kFile, {}};
}

HostContext HostContext::from_process() {
  HostContext h;
  h.fs = std::make_shared<RealFilesystem>();
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    h.env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  if (auto it = h.env.find("HOME"); it != h.env.end()) h.home = it->second;
  return h;
}

std::string lexical_normalize(std::string_view absolute_path) {
  std::vector<std::string> parts;
  for (auto& c : split(absolute_path)) {
    if (c == ".") continue;
    if (c == "..") {
      if (!parts.empty()) parts.pop_back();
      continue;
    }
    parts.push_back(std::move(c));
  }
  return join(parts, parts.size());
}

Expansion expand(std::string_view path, const std::map<std::string, std::string>& env,
                 std::string_view home, std::string_view cwd) {
  Expansion out;
  std::string p;
  bool substituted = false;

  if (!path.empty() && path[0] == '~') {
    std::size_t end = 1;
    while (end < path.size() && path[end] != '/' && path[end] != '\\') ++end;
    if (end != 1) throw UnresolvableEnvVar(std::string(path.substr(0, end)));
    if (home.empty()) throw UnresolvableEnvVar("~");
    p = std::string(home) + std::string(path.substr(1));
    out.form = PathForm::kTilde;
    substituted = true;
  } else if (auto ref = env_ref_at(path, 0)) {
    const auto* value = env_lookup(env, ref->name);
    if (!value) throw UnresolvableEnvVar(ref->name);
    p = *value + std::string(path.substr(ref->end));
    out.form = PathForm::kEnvVar;
    substituted = true;
  } else {
    p = std::string(path);
  }

  for (auto& c : p) {
    if (c == '\\') c = '/';
  }

  auto set_form = [&](PathForm f) {
    if (!substituted) out.form = f;
  };

  if (p.rfind("//./", 0) == 0 || p.rfind("//?/", 0) == 0 || p == "//." || p == "//?") {
    set_form(PathForm::kDevice);
    out.foreign = true;
    out.normalized = normalize_foreign(p.substr(0, 3), p.size() > 3 ? p.substr(4) : "");
    out.joined = out.normalized;
    return out;
  }
  if (p.size() >= 2 && p[0] == '/' && p[1] == '/') {
    set_form(PathForm::kUnc);
    out.foreign = true;
    out.normalized = normalize_foreign("/", p.substr(2));
    out.normalized.insert(0, "/");
    out.joined = out.normalized;
    return out;
  }
  if (p.size() >= 2 && std::isalpha(static_cast<unsigned char>(p[0])) && p[1] == ':') {
    set_form(PathForm::kDriveLetter);
    out.foreign = true;
    std::string drive{static_cast<char>(std::toupper(static_cast<unsigned char>(p[0]))), ':', '/'};
    out.normalized = normalize_foreign(drive, p.substr(2));
    out.joined = out.normalized;
    return out;
  }
  if (p.empty() || p[0] != '/') {
    set_form(PathForm::kRelative);
    std::string base(cwd);
    if (base.empty()) base = "/";
    p = base + (base.back() == '/' ? "" : "/") + p;
  } else {
    set_form(PathForm::kAbsolute);
  }
  out.joined = p;
  out.normalized = lexical_normalize(p);
  return out;
}

std::string canonicalize(std::string_view absolute_path, const FilesystemView& fs) {
  std::vector<std::string> resolved;
  auto initial = split(absolute_path);
  std::deque<std::string> pending(initial.begin(), initial.end());
  int links = 0;
  // Once a component is missing nothing below it can be a symlink.
  bool missing = false;

  while (!pending.empty()) {
    std::string comp = std::move(pending.front());
    pending.pop_front();
    if (comp == ".") continue;
    if (comp == "..") {
      if (!resolved.empty()) resolved.pop_back();
      missing = false;
      continue;
    }
    resolved.push_back(comp);
    if (missing) continue;
    auto entry = fs.lookup(join(resolved, resolved.size()));
    switch (entry.kind) {
      case FsEntry::Kind::kSymlink: {
        if (++links > kMaxSymlinkResolutions) throw SymlinkLoop(std::string(absolute_path));
        resolved.pop_back();
        if (!entry.target.empty() && entry.target[0] == '/') resolved.clear();
        auto target = split(entry.target);
        pending.insert(pending.begin(), target.begin(), target.end());
        break;
      }
      case FsEntry::Kind::kMissing:
        missing = true;
        break;
      default:
        break;
    }
  }
  return join(resolved, resolved.size());
}

bool glob_match(std::string_view pattern, std::string_view path) {
  return glob_segments(split(pattern), 0, split(path), 0);
}

bool is_protected(std::string_view relative, const std::vector<std::string>& patterns) {
  auto parts = split(relative);
  for (std::size_t n = 1; n <= parts.size(); ++n) {
    std::vector<std::string> prefix(parts.begin(), parts.begin() + static_cast<long>(n));
    for (const auto& pat : patterns) {
      if (glob_segments(split(pat), 0, prefix, 0)) return true;
    }
  }
  return false;
}

bool is_inside(std::string_view canonical, std::string_view root) {
  if (root == "/") return !canonical.empty() && canonical[0] == '/';
  if (canonical == root) return true;
  return canonical.size() > root.size() && canonical.compare(0, root.size(), root) == 0 &&
         canonical[root.size()] == '/';
}

namespace {

Verdict verdict_for(const PathDecision& d, const PolicyConfig& config) {
  auto outside = [](OutsidePolicy p, std::string_view rule, const std::string& msg,
                    const std::string& evidence) {
    RuleHit hit{std::string(rule), msg, evidence};
    return p == OutsidePolicy::kDeny ? Verdict::deny(hit) : Verdict::require_approval(hit);
  };
  switch (d.op_class) {
    case FileOperationClass::kReadOutside:
      return outside(config.outside_read_policy, rules::kPathReadOutside,
                     "read outside the workspace resolves to " + d.canonical, d.requested);
    case FileOperationClass::kWriteOutside:
      return outside(config.outside_write_policy, rules::kPathWriteOutside,
                     "write outside the workspace resolves to " + d.canonical, d.requested);
    default:
      break;
  }
  if (d.is_protected) {
    return Verdict::require_approval({std::string(rules::kPathProtected),
                                      "path is a protected configuration file: " + d.canonical,
                                      d.requested});
  }
  return Verdict::allow();
}

std::pair<PathDecision, Verdict> decide_one(Operation op, std::string_view path,
                                            const PolicyConfig& config, const HostContext& host,
                                            const std::string& root) {
  PathDecision d;
  d.requested = std::string(path);
  const bool write = op == Operation::kWrite;
  d.op_class = write ? FileOperationClass::kWriteOutside : FileOperationClass::kReadOutside;

  Expansion e;
  try {
    e = expand(path, host.env, host.home, host.cwd.empty() ? config.workspace_root : host.cwd);
  } catch (const UnresolvableEnvVar& ex) {
    d.form = path.empty() || path[0] != '~' ? PathForm::kEnvVar : PathForm::kTilde;
    return {d, Verdict::deny({std::string(rules::kPathUnresolved), ex.what(), d.requested})};
  }
  d.form = e.form;
  d.expanded = e.normalized;

  if (e.foreign) {
    d.canonical = e.normalized;
  } else {
    try {
      d.canonical = canonicalize(e.joined, *host.fs);
    } catch (const SymlinkLoop& ex) {
      return {d, Verdict::deny({std::string(rules::kPathLoop), ex.what(), d.requested})};
    }
  }

  if (!e.foreign && is_inside(d.canonical, root)) {
    d.op_class = write ? FileOperationClass::kWriteInside : FileOperationClass::kReadInside;
    std::string_view rel = std::string_view(d.canonical).substr(root == "/" ? 1 : root.size());
    if (!rel.empty() && rel[0] == '/') rel.remove_prefix(1);
    d.is_protected = is_protected(rel, config.protected_relative_paths);
  }
  return {d, verdict_for(d, config)};
}

}  // namespace

std::pair<PathDecision, Verdict> decide(Operation op, std::string_view path,
                                        const PolicyConfig& config, const HostContext& host) {
  static const RealFilesystem kReal;
  HostContext local = host;
  if (!local.fs) local.fs = std::shared_ptr<const FilesystemView>(&kReal, [](const auto*) {});

  // The workspace root itself may sit behind symlinks.
  std::string root;
  try {
    root = canonicalize(config.workspace_root, *local.fs);
  } catch (const SymlinkLoop&) {
    root = config.workspace_root;
  }

  auto result = decide_one(op, path, config, local, root);
  // A non-leading variable reference may be literal or expanded by whoever
  // runs the operation; the stricter reading wins.
  if (auto alt = expand_embedded(path, local.env)) {
    auto other = decide_one(op, *alt, config, local, root);
    if (static_cast<int>(other.second.decision) > static_cast<int>(result.second.decision)) {
      other.first.requested = std::string(path);
      result = std::move(other);
    }
  }
  return result;
}

}  // namespace tcfw::paths
