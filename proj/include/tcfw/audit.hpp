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

#include <condition_variable>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tcfw/approval.hpp"
#include "tcfw/types.hpp"

namespace tcfw {

struct AuditRecord {
  std::string ts;  // RFC 3339 UTC, millisecond precision
  std::string event;  // "evaluate" or "finalize"
  std::string session_id;
  std::string tool_name;
  // Verdict decision for "evaluate", execute/reject for "finalize".
  std::string decision;
  std::vector<std::string> rule_ids;
  std::string digest;
  // Stripped model fields, kept for audit only.
  std::map<std::string, std::string> stripped;
  bool cache_hit = false;

  bool operator==(const AuditRecord&) const = default;
};

std::string now_rfc3339();

AuditRecord evaluation_record(const ToolCallRequest& request, const Verdict& verdict);
AuditRecord finalize_record(const ToolCallRequest& request, const Finalization& f);

std::string to_json_line(const AuditRecord& r);
// Throws Error on anything that is not one complete record.
AuditRecord parse_audit_line(std::string_view line);
std::vector<AuditRecord> read_audit_log(const std::string& path);

class AuditError : public Error {
 public:
  using Error::Error;
};

struct AuditOptions {
  // fsync after every line; appends then block until durable.
  bool fsync = false;
};

// Append-only JSONL log. A single writer thread drains a queue, so lines
// never interleave.
class AuditLog {
 public:
  // Throws AuditError when the file cannot be opened for appending.
  static std::unique_ptr<AuditLog> open(const std::string& path, AuditOptions options = {});
  ~AuditLog();
  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  // Queues the record. Returns false when the log is degraded; with fsync
  // set, waits for the write and reports its outcome.
  bool append(const AuditRecord& record);
  // Waits until every queued record is written. Returns false if any write
  // since open has failed.
  bool flush();
  bool degraded() const;
  const std::string& path() const { return path_; }

 private:
  AuditLog(std::string path, int fd, AuditOptions options);
  void run();

  struct Item {
    std::string line;
    std::promise<bool> done;
  };

  std::string path_;
  int fd_;
  AuditOptions options_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable drained_;
  std::deque<Item> queue_;
  bool writing_ = false;
  bool stop_ = false;
  bool degraded_ = false;
  std::thread writer_;
};

// Appends the evaluation record. When the log is degraded the verdict keeps
// its decision and gains an AUDIT.DEGRADED hit.
bool audit_evaluation(AuditLog& log, const ToolCallRequest& request, Verdict& verdict);

}  // namespace tcfw
