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
#include <mutex>
#include <string>
#include <thread>

#include "tcfw/audit.hpp"
#include "tcfw/corpus.hpp"
#include "tcfw/paths.hpp"
#include "tcfw/types.hpp"

namespace httplib {
class Server;
}

namespace tcfw {

struct GatewayOptions {
  std::string config_path;
  std::string catalog_path;
  std::string host = "127.0.0.1";
  // 0 picks a free port.
  int port = 8731;
  std::string audit_path;
  bool audit_fsync = false;
  // Declarative filesystem used instead of the real one.
  std::string fs_fixture_path;
};

// Immutable view shared by in-flight requests; reload swaps in a new one.
struct Snapshot {
  PolicyConfig config;
  ToolCatalog catalog;
  std::string digest;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

class Gateway {
 public:
  // Loads config, catalog and fixture and opens the audit log. Throws
  // ConfigError or AuditError; nothing is listening yet.
  explicit Gateway(GatewayOptions options);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds and serves on a background thread. Returns the bound port.
  int start();
  void stop();
  // Blocks until stop().
  void wait();

  std::shared_ptr<const Snapshot> snapshot() const;
  // Re-reads config and catalog. On error the current snapshot stays.
  void reload();

  // Endpoint bodies, callable without a socket.
  HttpResponse check(std::string_view body);
  HttpResponse health() const;
  HttpResponse reload_endpoint();

  const GatewayOptions& options() const { return options_; }

 private:
  std::shared_ptr<const Snapshot> load() const;

  GatewayOptions options_;
  paths::HostContext host_;
  std::unique_ptr<AuditLog> audit_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  int port_ = 0;
};

// FIREWALL_CONFIG, when set, wins over the flag value.
std::string resolve_config_path(const std::string& flag_value);

// POST /v1/check against a running gateway. Throws Error on transport
// failures and on non-200 responses.
Verdict check_over_http(const std::string& host, int port, const ToolCallRequest& request);

// Loopback gateways keyed by effective policy, started on demand, so a corpus
// whose cases override the policy can still run end to end over HTTP.
class GatewayPool {
 public:
  // `fixture` is a host_from_fixture document; null means the real
  // filesystem.
  GatewayPool(std::string catalog_path, Value fixture);
  ~GatewayPool();

  corpus::Evaluator evaluator();
  std::size_t size() const;

 private:
  int port_for(const PolicyConfig& config);

  std::string catalog_path_;
  std::string fixture_path_;
  std::string scratch_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Gateway>> gateways_;
};

}  // namespace tcfw
