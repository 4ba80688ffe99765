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


#include "tcfw/audit.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>

#include "tcfw/rules.hpp"

namespace tcfw {

std::string now_rfc3339() {
  auto now = std::chrono::system_clock::now();
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

AuditRecord evaluation_record(const ToolCallRequest& request, const Verdict& verdict) {
  AuditRecord r;
  r.ts = now_rfc3339();
  r.event = "evaluate";
  r.session_id = request.session_id;
  r.tool_name = request.tool_name;
  r.decision = std::string(to_string(verdict.decision));
  r.rule_ids = verdict.rule_ids();
  r.digest = request_digest(verdict.sanitized_request ? *verdict.sanitized_request : request);
  r.stripped = request.raw_model_fields;
  return r;
}

AuditRecord finalize_record(const ToolCallRequest& request, const Finalization& f) {
  AuditRecord r;
  r.ts = now_rfc3339();
  r.event = "finalize";
  r.session_id = request.session_id;
  r.tool_name = request.tool_name;
  r.decision = std::string(to_string(f.decision));
  for (const auto& h : f.audit_hits) r.rule_ids.push_back(h.rule_id);
  r.digest = f.digest;
  r.stripped = request.raw_model_fields;
  r.cache_hit = f.cache_hit;
  return r;
}

std::string to_json_line(const AuditRecord& r) {
  nlohmann::ordered_json j;
  j["ts"] = r.ts;
  j["event"] = r.event;
  j["session_id"] = r.session_id;
  j["tool_name"] = r.tool_name;
  j["decision"] = r.decision;
  j["rule_ids"] = r.rule_ids;
  j["digest"] = r.digest;
  if (!r.stripped.empty()) j["stripped"] = r.stripped;
  if (r.cache_hit) j["cache_hit"] = true;
  // dump() escapes control characters, so the record is one line.
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

AuditRecord parse_audit_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("audit line is not JSON: ") + e.what());
  }
  try {
    AuditRecord r;
    r.ts = j.at("ts").get<std::string>();
    r.event = j.at("event").get<std::string>();
    r.session_id = j.at("session_id").get<std::string>();
    r.tool_name = j.at("tool_name").get<std::string>();
    r.decision = j.at("decision").get<std::string>();
    r.rule_ids = j.at("rule_ids").get<std::vector<std::string>>();
    r.digest = j.at("digest").get<std::string>();
    if (j.contains("stripped")) r.stripped = j["stripped"].get<std::map<std::string, std::string>>();
    r.cache_hit = j.value("cache_hit", false);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("audit line is missing fields: ") + e.what());
  }
}

std::vector<AuditRecord> read_audit_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read audit log '" + path + "'");
  std::vector<AuditRecord> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(parse_audit_line(line));
  return out;
}

std::unique_ptr<AuditLog> AuditLog::open(const std::string& path, AuditOptions options) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw AuditError("cannot open audit log '" + path + "': " + std::strerror(errno));
  return std::unique_ptr<AuditLog>(new AuditLog(path, fd, options));
}

AuditLog::AuditLog(std::string path, int fd, AuditOptions options)
    : path_(std::move(path)), fd_(fd), options_(options), writer_([this] { run(); }) {}

AuditLog::~AuditLog() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  writer_.join();
  ::close(fd_);
}

bool AuditLog::append(const AuditRecord& record) {
  Item item{to_json_line(record), {}};
  auto done = item.done.get_future();
  bool healthy;
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(item));
    healthy = !degraded_;
  }
  cv_.notify_one();
  if (options_.fsync) return done.get();
  return healthy;
}

bool AuditLog::flush() {
  std::unique_lock lock(mu_);
  drained_.wait(lock, [&] { return queue_.empty() && !writing_; });
  return !degraded_;
}

bool AuditLog::degraded() const {
  std::lock_guard lock(mu_);
  return degraded_;
}

void AuditLog::run() {
  for (;;) {
    Item item;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
      if (queue_.empty()) return;
      item = std::move(queue_.front());
      queue_.pop_front();
      writing_ = true;
    }
    bool ok = true;
    std::string_view rest = item.line;
    while (!rest.empty()) {
      ssize_t n = ::write(fd_, rest.data(), rest.size());
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        ok = false;
        break;
      }
      rest.remove_prefix(static_cast<std::size_t>(n));
    }
    if (ok && options_.fsync && ::fsync(fd_) != 0) ok = false;
    {
      std::lock_guard lock(mu_);
      if (!ok) degraded_ = true;
      writing_ = false;
    }
    item.done.set_value(ok);
    drained_.notify_all();
  }
}

bool audit_evaluation(AuditLog& log, const ToolCallRequest& request, Verdict& verdict) {
  if (log.append(evaluation_record(request, verdict))) return true;
  verdict.add(Decision::kAllow, {std::string(rules::kAuditDegraded), "audit log write failed", log.path()});
  return false;
}

}  // namespace tcfw
