// SPDX-License-Identifier: Apache-2.0
#include "medsim/uapi.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>

namespace medsim::uapi {

using signals::Quality;
using signals::SignalSample;
using signals::WriteError;

SignalApi::SignalApi(signals::SignalRegistry& reg, std::string service_ns,
                     int64_t staleness_horizon_ms, std::string set_origin)
    : reg_(reg),
      service_ns_(std::move(service_ns)),
      horizon_ms_(staleness_horizon_ms),
      set_origin_(std::move(set_origin)),
      start_(std::chrono::steady_clock::now()) {}

json SignalApi::sample_to_json(const signals::SignalDescriptor& d,
                               const SignalSample& s) {
  return json{{"namespace", d.ns},
              {"name", d.name},
              {"written", true},
              {"value", s.value},
              {"unit", d.unit},
              {"timestamp_ms", s.timestamp_ms},
              {"origin", s.origin},
              {"quality", std::string(signals::to_string(s.quality))}};
}

std::optional<SignalSample> SignalApi::sample_from_json(const json& j) {
  if (!j.is_object() || !j.value("written", false)) return std::nullopt;
  SignalSample s;
  if (!j.contains("value") || !j["value"].is_number()) return std::nullopt;
  s.value = j["value"].get<double>();
  s.timestamp_ms = j.value("timestamp_ms", int64_t{0});
  s.origin = j.value("origin", std::string{});
  auto q = signals::quality_from_string(j.value("quality", "ok"));
  s.quality = q.value_or(Quality::Ok);
  return s;
}

static SignalApi::Response not_found(const std::string& what) {
  return {404, json{{"error", what}}};
}

SignalApi::Response SignalApi::list_signals(const std::string& ns) const {
  if (!reg_.has_namespace(ns)) return not_found("unknown-namespace");
  json arr = json::array();
  for (const auto& d : reg_.list(ns)) {
    arr.push_back(json{{"namespace", d.ns},
                       {"name", d.name},
                       {"unit", d.unit},
                       {"min", d.min},
                       {"max", d.max},
                       {"kind", std::string(signals::to_string(d.kind))}});
  }
  return {200, json{{"namespace", ns}, {"signals", arr}}};
}

SignalApi::Response SignalApi::get_signal(const std::string& ns,
                                          const std::string& name) const {
  auto id = reg_.find(ns, name);
  if (!id) return not_found("unknown-signal");
  const auto& d = reg_.descriptor(*id);
  auto sample = reg_.read(*id);
  if (!sample) {
    // Registered but never written: distinguished from not-found.
    return {200, json{{"namespace", d.ns},
                      {"name", d.name},
                      {"written", false},
                      {"unit", d.unit}}};
  }
  return {200, sample_to_json(d, *sample)};
}

SignalApi::Response SignalApi::set_signal(const std::string& ns,
                                          const std::string& name,
                                          const json& body) {
  auto id = reg_.find(ns, name);
  if (!id) return not_found("unknown-signal");
  if (!body.is_object() || !body.contains("value") ||
      !body["value"].is_number()) {
    return {422, json{{"error", "unprocessable"},
                      {"detail", "body must carry a numeric \"value\""}}};
  }
  double value = body["value"].get<double>();
  if (!std::isfinite(value)) {
    return {422, json{{"error", "unprocessable"}, {"detail", "non-finite"}}};
  }
  int64_t ts = body.contains("timestamp_ms")
                   ? body["timestamp_ms"].get<int64_t>()
                   : now_ms_.load();
  std::string origin = body.value("origin", set_origin_);

  signals::WriteResult r;
  if (body.contains("quality")) {
    // Replication merge: preserve the sample exactly as captured upstream.
    SignalSample s;
    s.value = value;
    s.timestamp_ms = ts;
    s.origin = origin;
    s.quality = signals::quality_from_string(body["quality"].get<std::string>())
                    .value_or(Quality::Ok);
    r = reg_.merge(*id, s);
  } else {
    r = reg_.write(*id, value, ts, origin);
  }
  switch (r.error) {
    case WriteError::None:
      return {200, sample_to_json(reg_.descriptor(*id), r.applied)};
    case WriteError::Superseded:
      return {409, json{{"error", "superseded"}}};
    case WriteError::NonFinite:
      return {422, json{{"error", "unprocessable"}, {"detail", "non-finite"}}};
    case WriteError::UnknownSignal:
      break;
  }
  return not_found("unknown-signal");
}

SignalApi::Response SignalApi::get_status(const std::string& ns) const {
  if (!reg_.has_namespace(ns)) return not_found("unknown-namespace");
  int64_t now = now_ms_.load();
  json per_signal = json::array();
  bool any_stale = false;
  for (const auto& d : reg_.list(ns)) {
    auto id = reg_.find(d.ns, d.name);
    bool stale = reg_.is_stale(*id, now, horizon_ms_);
    any_stale = any_stale || stale;
    auto sample = reg_.read(*id);
    per_signal.push_back(
        json{{"name", d.name},
             {"written", sample.has_value()},
             {"age_ms", sample ? json(now - sample->timestamp_ms) : json()},
             {"stale", stale}});
  }
  auto uptime = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
  return {200, json{{"namespace", ns},
                    {"status", any_stale ? "degraded" : "ok"},
                    {"uptime_ms", uptime},
                    {"now_ms", now},
                    {"signals", per_signal}}};
}

SignalApi::Response SignalApi::snapshot(const std::string& ns) const {
  if (!reg_.has_namespace(ns)) return not_found("unknown-namespace");
  json arr = json::array();
  for (const auto& d : reg_.list(ns)) {
    auto id = reg_.find(d.ns, d.name);
    auto sample = reg_.read(*id);
    if (sample) {
      arr.push_back(sample_to_json(d, *sample));
    } else {
      arr.push_back(json{{"namespace", d.ns},
                         {"name", d.name},
                         {"written", false},
                         {"unit", d.unit}});
    }
  }
  return {200, json{{"namespace", ns}, {"signals", arr}}};
}

// ---------------------------------------------------------------------------

static void reply(httplib::Response& res, const SignalApi::Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

UapiServer::UapiServer(SignalApi& api)
    : api_(api), server_(std::make_unique<httplib::Server>()) {
  server_->Get(R"(/v1/([^/]+)/signals)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 reply(res, api_.list_signals(req.matches[1]));
               });
  server_->Get(R"(/v1/([^/]+)/signals/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 reply(res, api_.get_signal(req.matches[1], req.matches[2]));
               });
  server_->Put(R"(/v1/([^/]+)/signals/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 json body = json::parse(req.body, nullptr, false);
                 if (body.is_discarded()) {
                   reply(res, {422, json{{"error", "unprocessable"},
                                         {"detail", "invalid json"}}});
                   return;
                 }
                 reply(res, api_.set_signal(req.matches[1], req.matches[2],
                                            body));
               });
  server_->Get(R"(/v1/([^/]+)/status)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 reply(res, api_.get_status(req.matches[1]));
               });
  server_->Get(R"(/v1/([^/]+)/snapshot)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 reply(res, api_.snapshot(req.matches[1]));
               });
}

UapiServer::~UapiServer() { stop(); }

void UapiServer::add_post_route(const std::string& path, Handler h) {
  server_->Post(path, [h = std::move(h)](const httplib::Request& req,
                                         httplib::Response& res) {
    json body = req.body.empty() ? json::object()
                                 : json::parse(req.body, nullptr, false);
    if (body.is_discarded()) body = json::object();
    reply(res, h(body));
  });
}

void UapiServer::add_get_route(const std::string& path, Handler h) {
  server_->Get(path, [h = std::move(h)](const httplib::Request&,
                                        httplib::Response& res) {
    reply(res, h(json::object()));
  });
}

bool UapiServer::listen(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ <= 0) return false;
  } else {
    if (!server_->bind_to_port(host, port)) return false;
    port_ = port;
  }
  thread_ = std::make_unique<std::thread>(
      [this]() { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return true;
}

void UapiServer::stop() {
  if (server_) server_->stop();
  if (thread_ && thread_->joinable()) thread_->join();
  thread_.reset();
}

// ---------------------------------------------------------------------------

static std::pair<std::string, int> split_url(const std::string& base_url) {
  // Accepts http://host:port
  std::string rest = base_url;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  auto colon = rest.rfind(':');
  if (colon == std::string::npos) return {rest, 80};
  return {rest.substr(0, colon), std::stoi(rest.substr(colon + 1))};
}

UapiClient::UapiClient(const std::string& base_url) {
  auto [host, port] = split_url(base_url);
  host_ = host;
  port_ = port;
  client_ = std::make_unique<httplib::Client>(host_, port_);
  client_->set_connection_timeout(2, 0);
  client_->set_read_timeout(10, 0);
  client_->set_keep_alive(true);
}

UapiClient::~UapiClient() = default;

static UapiClient::Result to_result(const httplib::Result& r) {
  if (!r) return {0, {}};
  json body = json::parse(r->body, nullptr, false);
  if (body.is_discarded()) body = json::object();
  return {r->status, std::move(body)};
}

UapiClient::Result UapiClient::get(const std::string& path) const {
  return to_result(client_->Get(path));
}

UapiClient::Result UapiClient::put(const std::string& path,
                                   const json& body) const {
  return to_result(client_->Put(path, body.dump(), "application/json"));
}

UapiClient::Result UapiClient::post(const std::string& path,
                                    const json& body) const {
  return to_result(client_->Post(path, body.dump(), "application/json"));
}

// ---------------------------------------------------------------------------

bool HttpTransport::store(const signals::SignalKey& key,
                          const signals::SignalSample& sample) {
  json body{{"value", sample.value},
            {"timestamp_ms", sample.timestamp_ms},
            {"origin", sample.origin},
            {"quality", std::string(signals::to_string(sample.quality))}};
  auto r = client_.put("/v1/" + key.ns + "/signals/" + key.name, body);
  // 409 means the remote already holds something newer; that still counts
  // as delivered for cursor purposes.
  return r.ok() || r.status == 409;
}

std::optional<signals::SignalSample> HttpTransport::fetch(
    const signals::SignalKey& key) {
  auto r = client_.get("/v1/" + key.ns + "/signals/" + key.name);
  if (!r.ok()) return std::nullopt;
  return SignalApi::sample_from_json(r.body);
}

}  // namespace medsim::uapi
