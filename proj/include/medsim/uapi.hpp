// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "medsim/replication.hpp"
#include "medsim/signals.hpp"

namespace httplib {
class Server;
class Client;
}  // namespace httplib

namespace medsim::uapi {

using nlohmann::json;

// Transport-independent request handling over one registry. The REST layer
// below is a pure facade: every request maps onto exactly one registry
// operation.
class SignalApi {
 public:
  struct Response {
    int status = 200;
    json body;
  };

  SignalApi(signals::SignalRegistry& reg, std::string service_ns,
            int64_t staleness_horizon_ms, std::string set_origin);

  // GET /v1/{ns}/signals
  Response list_signals(const std::string& ns) const;
  // GET /v1/{ns}/signals/{name}
  Response get_signal(const std::string& ns, const std::string& name) const;
  // PUT /v1/{ns}/signals/{name}. Bodies carry {"value": x} plus optional
  // "timestamp_ms" and "origin"; a body with "quality" is a replication
  // merge and is stored verbatim under last-write-wins.
  Response set_signal(const std::string& ns, const std::string& name,
                      const json& body);
  // GET /v1/{ns}/status
  Response get_status(const std::string& ns) const;
  // GET /v1/{ns}/snapshot — bulk read of a namespace.
  Response snapshot(const std::string& ns) const;

  // Simulated clock used for staleness and for stamping SETs that carry no
  // timestamp.
  void set_now_ms(int64_t now) { now_ms_ = now; }
  int64_t now_ms() const { return now_ms_; }

  signals::SignalRegistry& registry() { return reg_; }
  const std::string& service_namespace() const { return service_ns_; }

  static json sample_to_json(const signals::SignalDescriptor& d,
                             const signals::SignalSample& s);
  static std::optional<signals::SignalSample> sample_from_json(const json& j);

 private:
  signals::SignalRegistry& reg_;
  std::string service_ns_;
  int64_t horizon_ms_;
  std::string set_origin_;
  std::atomic<int64_t> now_ms_{0};
  std::chrono::steady_clock::time_point start_;
};

// HTTP server wrapper: mounts the uAPI routes for every namespace in the
// registry plus any extra orchestration routes registered before listen().
class UapiServer {
 public:
  explicit UapiServer(SignalApi& api);
  ~UapiServer();

  using Handler = std::function<SignalApi::Response(const json& body)>;
  void add_post_route(const std::string& path, Handler h);
  void add_get_route(const std::string& path, Handler h);

  // Binds and serves on a background thread. Returns false when the port is
  // already taken.
  bool listen(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  SignalApi& api_;
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> thread_;
  int port_ = 0;
};

// Minimal JSON-over-HTTP client for the uAPI.
class UapiClient {
 public:
  explicit UapiClient(const std::string& base_url);
  ~UapiClient();

  struct Result {
    int status = 0;  // 0 = transport failure
    json body;
    bool ok() const { return status >= 200 && status < 300; }
  };

  Result get(const std::string& path) const;
  Result put(const std::string& path, const json& body) const;
  Result post(const std::string& path, const json& body) const;

 private:
  std::string host_;
  int port_;
  std::unique_ptr<httplib::Client> client_;
};

// REST binding of the replication transport: store/fetch against a remote
// uAPI node (normally the cloud store).
class HttpTransport : public repl::SignalTransport {
 public:
  explicit HttpTransport(const std::string& base_url) : client_(base_url) {}

  bool store(const signals::SignalKey& key,
             const signals::SignalSample& sample) override;
  std::optional<signals::SignalSample> fetch(
      const signals::SignalKey& key) override;

 private:
  UapiClient client_;
};

}  // namespace medsim::uapi
