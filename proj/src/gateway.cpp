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


#include "tcfw/gateway.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "httplib.h"
#include "tcfw/approval.hpp"
#include "tcfw/pipeline.hpp"
#include "tcfw/serialization.hpp"

namespace tcfw {

namespace {

constexpr std::size_t kMaxBodyBytes = std::size_t{16} << 20;

HttpResponse json_response(int status, const Value& body) { return {status, body.dump()}; }

HttpResponse malformed(const std::string& message, const std::string& field) {
  Value j = {{"error", "WIRE.MALFORMED"}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  return json_response(400, j);
}

}  // namespace

std::string resolve_config_path(const std::string& flag_value) {
  if (const char* env = std::getenv("FIREWALL_CONFIG"); env && *env) return env;
  return flag_value;
}

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
  if (options_.config_path.empty()) throw ConfigError("no policy config given", "config");
  if (options_.catalog_path.empty()) throw ConfigError("no tool catalog given", "catalog");
  snapshot_ = load();
  if (options_.fs_fixture_path.empty()) {
    host_ = paths::HostContext::from_process();
  } else {
    auto doc = read_json_file(options_.fs_fixture_path);
    try {
      host_ = host_from_fixture(doc.value);
    } catch (const Error& e) {
      throw ConfigError(e.what(), "", options_.fs_fixture_path);
    }
  }
  if (!options_.audit_path.empty()) audit_ = AuditLog::open(options_.audit_path, {.fsync = options_.audit_fsync});
}

Gateway::~Gateway() { stop(); }

std::shared_ptr<const Snapshot> Gateway::load() const {
  auto s = std::make_shared<Snapshot>(Snapshot{load_policy_config(options_.config_path),
                                                load_catalog(options_.catalog_path), ""});
  s->digest = policy_digest(s->config, s->catalog);
  return s;
}

std::shared_ptr<const Snapshot> Gateway::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

void Gateway::reload() {
  auto fresh = load();
  std::lock_guard lock(snapshot_mu_);
  snapshot_ = std::move(fresh);
}

HttpResponse Gateway::check(std::string_view body) {
  JsonDocument doc;
  try {
    doc = parse_json_document(body, "<request>");
  } catch (const ConfigError& e) {
    return malformed(e.message(), "");
  }
  ToolCallRequest request;
  try {
    request = request_from_json(doc);
  } catch (const WireError& e) {
    return malformed(e.what(), e.field());
  }

  auto snap = snapshot();
  Verdict verdict = evaluate(request, snap->catalog, snap->config, host_);
  if (audit_) audit_evaluation(*audit_, request, verdict);
  Value out = verdict_to_json(verdict);
  if (snap->config.approval_mode == ApprovalMode::kAutoApprove) {
    SessionStore store;
    auto f = finalize(verdict, request, snap->config, nullptr, store);
    out["final"] = to_string(f.decision);
    Value hits = Value::array();
    for (const auto& h : f.audit_hits) {
      if (!verdict.has_rule(h.rule_id)) hits.push_back({{"rule_id", h.rule_id}, {"message", h.message}, {"evidence", h.evidence}});
    }
    out["approval_hits"] = hits;
    if (audit_) audit_->append(finalize_record(request, f));
  }
  return json_response(200, out);
}

HttpResponse Gateway::health() const {
  return json_response(200, {{"status", "ok"}, {"policy_digest", snapshot()->digest}});
}

HttpResponse Gateway::reload_endpoint() {
  try {
    reload();
  } catch (const Error& e) {
    return json_response(422, {{"error", "CONFIG.INVALID"}, {"message", e.what()}});
  }
  return json_response(200, {{"status", "reloaded"}, {"policy_digest", snapshot()->digest}});
}

int Gateway::start() {
  if (server_) return port_;
  server_ = std::make_unique<httplib::Server>();
  server_->set_payload_max_length(kMaxBodyBytes);
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Post("/v1/check", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, check(req.body));
  });
  server_->Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
  server_->Post("/v1/reload", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, reload_endpoint());
  });

  int port = options_.port == 0 ? server_->bind_to_any_port(options_.host)
                                : (server_->bind_to_port(options_.host, options_.port) ? options_.port : -1);
  if (port < 0) {
    server_.reset();
    throw Error("cannot listen on " + options_.host + ":" + std::to_string(options_.port));
  }
  port_ = port;
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void Gateway::stop() {
  if (server_) server_->stop();
  if (listener_.joinable()) listener_.join();
  if (audit_) audit_->flush();
}

void Gateway::wait() {
  if (listener_.joinable()) listener_.join();
}

Verdict check_over_http(const std::string& host, int port, const ToolCallRequest& request) {
  httplib::Client client(host, port);
  client.set_read_timeout(30);
  auto res = client.Post("/v1/check", request_to_wire(request), "application/json");
  if (!res) throw Error("gateway request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error("gateway answered " + std::to_string(res->status) + ": " + res->body);
  return verdict_from_json(Value::parse(res->body));
}

GatewayPool::GatewayPool(std::string catalog_path, Value fixture) : catalog_path_(std::move(catalog_path)) {
  std::string tmpl = (std::filesystem::temp_directory_path() / "tcfw-pool-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw Error("cannot create scratch directory");
  scratch_ = tmpl;
  if (!fixture.is_null()) {
    fixture_path_ = scratch_ + "/fixture.json";
    std::ofstream(fixture_path_) << fixture.dump();
  }
}

GatewayPool::~GatewayPool() {
  gateways_.clear();
  std::error_code ec;
  std::filesystem::remove_all(scratch_, ec);
}

int GatewayPool::port_for(const PolicyConfig& config) {
  std::string key = policy_config_to_json(config).dump();
  std::lock_guard lock(mu_);
  auto it = gateways_.find(key);
  if (it == gateways_.end()) {
    std::string path = scratch_ + "/policy-" + std::to_string(gateways_.size()) + ".json";
    std::ofstream(path) << key;
    GatewayOptions o;
    o.config_path = path;
    o.catalog_path = catalog_path_;
    o.port = 0;
    o.fs_fixture_path = fixture_path_;
    auto gw = std::make_unique<Gateway>(o);
    gw->start();
    it = gateways_.emplace(key, std::move(gw)).first;
  }
  return it->second->start();
}

corpus::Evaluator GatewayPool::evaluator() {
  return [this](const ToolCallRequest& request, const PolicyConfig& config) {
    return check_over_http("127.0.0.1", port_for(config), request);
  };
}

std::size_t GatewayPool::size() const {
  std::lock_guard lock(mu_);
  return gateways_.size();
}

}  // namespace tcfw
