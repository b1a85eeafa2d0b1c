// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <chrono>
#include <cstdio>
#include <memory>
#include <thread>

#include "medsim/harness.hpp"
#include "medsim/nodes.hpp"
#include "medsim/rng.hpp"
#include "medsim/uapi.hpp"
#include "medsim/util.hpp"

namespace medsim::harness {

using nlohmann::json;

int serve_node(const std::string& ns, const ScenarioConfig& cfg,
               const std::string& host, int port) {
  const bool is_cloud = ns == "CLOUD";

  std::unique_ptr<RiNode> node;
  std::unique_ptr<signals::SignalRegistry> cloud_registry;
  std::unique_ptr<uapi::HttpTransport> cloud_transport;
  std::unique_ptr<repl::ReplicaPort> port_to_cloud;

  signals::SignalRegistry* registry = nullptr;
  if (is_cloud) {
    cloud_registry = std::make_unique<signals::SignalRegistry>();
    signals::populate_default_catalog(*cloud_registry);
    registry = cloud_registry.get();
  } else {
    node = make_node(ns, cfg);
    registry = &node->store().registry;
    cloud_transport = std::make_unique<uapi::HttpTransport>(
        cfg.deployment.endpoints.at("CLOUD"));
    port_to_cloud = std::make_unique<repl::ReplicaPort>(
        node->store(), *cloud_transport, node->subscriptions(),
        cfg.link_config(derive_seed(cfg.seed, ns + "/up")),
        cfg.link_config(derive_seed(cfg.seed, ns + "/down")));
  }

  uapi::SignalApi api(*registry, ns, cfg.staleness_horizon_ms, ns);
  uapi::UapiServer server(api);
  std::atomic<bool> shutdown{false};

  server.add_get_route("/admin/info", [&](const json&) -> uapi::SignalApi::Response {
    json body{{"namespace", ns}, {"version", kVersion}};
    if (!is_cloud) body["config_hash"] = to_hex(config_hash(cfg));
    return {200, body};
  });
  server.add_post_route("/admin/shutdown",
                        [&](const json&) -> uapi::SignalApi::Response {
                          shutdown = true;
                          return {200, json{{"ok", true}}};
                        });

  if (!is_cloud) {
    server.add_post_route(
        "/v1/" + ns + "/advance",
        [&](const json& body) -> uapi::SignalApi::Response {
          int64_t tick = body.value("tick", int64_t{0});
          int64_t t_ms = body.value("time_ms", int64_t{0});
          std::string phase = body.value("phase", "");
          api.set_now_ms(t_ms);
          if (phase == "step") {
            node->step(tick, t_ms);
          } else if (phase == "thermal") {
            node->thermal_step(tick, t_ms);
          } else {
            return {400, json{{"error", "unknown-phase"}}};
          }
          return {200, json{{"ok", true}, {"tick", tick}}};
        });
    server.add_post_route(
        "/v1/" + ns + "/replicate",
        [&](const json& body) -> uapi::SignalApi::Response {
          std::string dir = body.value("dir", "");
          int64_t cycle = body.value("cycle", int64_t{0});
          int transferred;
          if (dir == "up") {
            transferred = port_to_cloud->push(cycle);
          } else if (dir == "down") {
            transferred = port_to_cloud->pull(cycle);
          } else {
            return {400, json{{"error", "unknown-direction"}}};
          }
          return {200, json{{"ok", true}, {"transferred", transferred}}};
        });
  }

  if (!server.listen(host, port)) {
    std::fprintf(stderr, "medsim serve: port %d on %s is unavailable\n", port,
                 host.c_str());
    return 2;
  }
  std::printf("medsim serve: %s listening on %s:%d\n", ns.c_str(),
              host.c_str(), server.port());
  std::fflush(stdout);

  while (!shutdown) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  server.stop();
  return 0;
}

}  // namespace medsim::harness
