// SPDX-License-Identifier: Apache-2.0
#include "medsim/harness.hpp"

#include <chrono>
#include <memory>
#include <thread>
#include <unordered_map>

#include "medsim/nodes.hpp"
#include "medsim/rng.hpp"
#include "medsim/uapi.hpp"
#include "medsim/util.hpp"

namespace medsim::harness {

using signals::SignalKey;

namespace {

std::vector<SignalKey> catalog_keys() {
  signals::SignalRegistry reg;
  signals::populate_default_catalog(reg);
  std::vector<SignalKey> keys;
  for (uint32_t i = 0; i < reg.size(); ++i) keys.push_back(reg.key({i}));
  return keys;
}

void add_common_metrics(RunMetrics& m, const ScenarioConfig& cfg,
                        const char* mode) {
  m.add("version", std::string(kVersion));
  m.add("scenario", std::string(to_string(cfg.kind)));
  m.add("mode", std::string(mode));
  m.add("seed", static_cast<int64_t>(cfg.seed));
  m.add("config_hash", to_hex(config_hash(cfg)));
}

// ---------------------------------------------------------------- in-process

RunResult run_in_process(const ScenarioConfig& cfg, bool realtime) {
  std::vector<std::unique_ptr<RiNode>> nodes;
  for (const char* ns : kRiNamespaces) nodes.push_back(make_node(ns, cfg));

  signals::SignalRegistry cloud_registry;
  signals::populate_default_catalog(cloud_registry);
  repl::InMemoryTransport cloud(cloud_registry);

  std::vector<repl::ReplicaPort> ports;
  ports.reserve(nodes.size());
  for (auto& n : nodes) {
    ports.emplace_back(n->store(), cloud, n->subscriptions(),
                       cfg.link_config(derive_seed(cfg.seed, n->id() + "/up")),
                       cfg.link_config(derive_seed(cfg.seed, n->id() + "/down")));
  }
  ControllerRuntime controller(cfg);
  repl::ReplicaPort controller_port(
      controller.store(), cloud, controller.subscriptions(),
      cfg.link_config(derive_seed(cfg.seed, "CSC/up")),
      cfg.link_config(derive_seed(cfg.seed, "CSC/down")));

  // Record layout and owner lookup.
  auto keys = catalog_keys();
  RunRecord rec;
  for (const auto& k : keys) rec.columns.push_back(k.str());
  std::unordered_map<std::string, signals::SignalRegistry*> stores;
  for (auto& n : nodes) stores[n->id()] = &n->store().registry;
  stores["CSC"] = &controller.store().registry;

  // Subscribers per key, for visibility-lag accounting.
  std::map<SignalKey, std::vector<std::string>> subscribers;
  for (auto& n : nodes) {
    for (const auto& k : n->subscriptions()) subscribers[k].push_back(n->id());
  }
  for (const auto& k : controller.subscriptions()) {
    subscribers[k].push_back("CSC");
  }
  repl::LagTracker tracker;
  std::map<SignalKey, int64_t> last_noted_ts;
  auto note_new_writes = [&](int64_t cycles_done) {
    for (const auto& k : keys) {
      auto sub = subscribers.find(k);
      if (sub == subscribers.end()) continue;
      auto* reg = stores.at(signal_owners().at(k));
      auto sample = reg->read(*reg->find(k));
      if (!sample) continue;
      auto it = last_noted_ts.find(k);
      if (it != last_noted_ts.end() && sample->timestamp_ms <= it->second) {
        continue;
      }
      last_noted_ts[k] = sample->timestamp_ms;
      tracker.note_write(k, sample->timestamp_ms, cycles_done, sub->second);
    }
  };

  const int64_t dt_ms = cfg.dt_ms();
  const int64_t ticks_per_cycle = cfg.ticks_per_cycle();
  int64_t cycles_done = 0;

  for (int64_t tick = 0; tick < cfg.total_ticks(); ++tick) {
    const int64_t t_ms = tick * dt_ms;
    for (auto& n : nodes) n->step(tick, t_ms);

    if (tick % ticks_per_cycle == 0) {
      note_new_writes(cycles_done);
      const int64_t cycle = ++cycles_done;
      for (auto& p : ports) p.push(cycle);
      controller_port.pull(cycle);
      controller.control_step(t_ms);
      controller_port.push(cycle);
      for (auto& p : ports) p.pull(cycle);
      for (auto& n : nodes) {
        tracker.observe(n->id(), n->store().registry, cycle);
      }
      tracker.observe("CSC", controller.store().registry, cycle);
    }

    for (auto& n : nodes) n->thermal_step(tick, t_ms);

    RunRecord::Row row;
    row.time_ms = t_ms;
    for (const auto& k : keys) {
      auto* reg = stores.at(signal_owners().at(k));
      auto sample = reg->read(*reg->find(k));
      RunRecord::Cell cell;
      if (sample) {
        cell.written = true;
        cell.value = sample->value;
        cell.quality = sample->quality;
      }
      row.cells.push_back(cell);
    }
    rec.rows.push_back(std::move(row));

    if (realtime) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<int64_t>(cfg.dt_s * 1000)));
    }
  }

  double v_nom = cfg.topology.value("v_nom", 240.0);
  RunResult result;
  result.record = std::move(rec);
  result.metrics = compute_metrics(result.record, v_nom);
  add_common_metrics(result.metrics, cfg, "in-process");
  result.metrics.add("replication_cycles", cycles_done);
  result.metrics.add("replication_max_lag_cycles", tracker.overall_max_cycles());
  result.metrics.add("controller_stale_reads",
                     static_cast<int64_t>(controller.stale_reads()));
  auto* tud = dynamic_cast<TudGridNode*>(nodes.front().get());
  result.metrics.add("grid_not_converged_ticks",
                     static_cast<int64_t>(tud->not_converged_count()));
  return result;
}

// -------------------------------------------------------------- multi-process

struct RemoteRi {
  std::string ns;
  std::unique_ptr<uapi::UapiClient> client;
};

void advance_remote(const RemoteRi& ri, int64_t tick, int64_t t_ms,
                    const char* phase) {
  auto r = ri.client->post("/v1/" + ri.ns + "/advance",
                           {{"tick", tick}, {"time_ms", t_ms}, {"phase", phase}});
  if (!r.ok()) {
    throw ConfigError("endpoint unreachable: " + ri.ns + " (advance)");
  }
}

void replicate_remote(const RemoteRi& ri, const char* dir, int64_t cycle) {
  auto r = ri.client->post("/v1/" + ri.ns + "/replicate",
                           {{"dir", dir}, {"cycle", cycle}});
  if (!r.ok()) {
    throw ConfigError("endpoint unreachable: " + ri.ns + " (replicate)");
  }
}

RunResult run_multi_process(const ScenarioConfig& cfg) {
  std::vector<RemoteRi> ris;
  for (const char* ns : kRiNamespaces) {
    ris.push_back({ns, std::make_unique<uapi::UapiClient>(
                           cfg.deployment.endpoints.at(ns))});
  }
  // Reachability and configuration agreement up front.
  const std::string expected_hash = to_hex(config_hash(cfg));
  for (const auto& ri : ris) {
    auto info = ri.client->get("/admin/info");
    if (!info.ok()) throw ConfigError("endpoint unreachable: " + ri.ns);
    if (info.body.value("config_hash", "") != expected_hash) {
      throw ConfigError("endpoint " + ri.ns +
                        " is serving a different configuration");
    }
  }
  uapi::UapiClient cloud_probe(cfg.deployment.endpoints.at("CLOUD"));
  if (!cloud_probe.get("/v1/SIN/status").ok()) {
    throw ConfigError("endpoint unreachable: CLOUD");
  }

  ControllerRuntime controller(cfg);
  uapi::HttpTransport cloud(cfg.deployment.endpoints.at("CLOUD"));
  repl::ReplicaPort controller_port(
      controller.store(), cloud, controller.subscriptions(),
      cfg.link_config(derive_seed(cfg.seed, "CSC/up")),
      cfg.link_config(derive_seed(cfg.seed, "CSC/down")));

  auto keys = catalog_keys();
  RunRecord rec;
  for (const auto& k : keys) rec.columns.push_back(k.str());

  // Snapshot plan: owner process -> namespaces it captures signals in.
  std::map<std::string, std::vector<std::string>> snapshot_plan;
  for (const auto& [key, owner] : signal_owners()) {
    if (owner == "CSC") continue;
    auto& list = snapshot_plan[owner];
    if (std::find(list.begin(), list.end(), key.ns) == list.end()) {
      list.push_back(key.ns);
    }
  }

  const int64_t dt_ms = cfg.dt_ms();
  const int64_t ticks_per_cycle = cfg.ticks_per_cycle();
  int64_t cycles_done = 0;

  for (int64_t tick = 0; tick < cfg.total_ticks(); ++tick) {
    const int64_t t_ms = tick * dt_ms;
    for (const auto& ri : ris) advance_remote(ri, tick, t_ms, "step");

    if (tick % ticks_per_cycle == 0) {
      const int64_t cycle = ++cycles_done;
      for (const auto& ri : ris) replicate_remote(ri, "up", cycle);
      controller_port.pull(cycle);
      controller.control_step(t_ms);
      controller_port.push(cycle);
      for (const auto& ri : ris) replicate_remote(ri, "down", cycle);
    }

    for (const auto& ri : ris) advance_remote(ri, tick, t_ms, "thermal");

    // Row snapshot, each signal read from the node that captures it.
    std::map<SignalKey, RunRecord::Cell> cells;
    for (const auto& ri : ris) {
      auto plan = snapshot_plan.find(ri.ns);
      if (plan == snapshot_plan.end()) continue;
      for (const auto& ns : plan->second) {
        auto r = ri.client->get("/v1/" + ns + "/snapshot");
        if (!r.ok()) throw ConfigError("endpoint unreachable: " + ri.ns);
        for (const auto& sj : r.body.at("signals")) {
          SignalKey key{sj.at("namespace").get<std::string>(),
                        sj.at("name").get<std::string>()};
          if (signal_owners().at(key) != ri.ns) continue;
          RunRecord::Cell cell;
          if (auto sample = uapi::SignalApi::sample_from_json(sj)) {
            cell.written = true;
            cell.value = sample->value;
            cell.quality = sample->quality;
          }
          cells[key] = cell;
        }
      }
    }
    RunRecord::Row row;
    row.time_ms = t_ms;
    for (const auto& k : keys) {
      if (signal_owners().at(k) == "CSC") {
        const auto& reg = controller.store().registry;
        auto sample = reg.read(*reg.find(k));
        RunRecord::Cell cell;
        if (sample) {
          cell.written = true;
          cell.value = sample->value;
          cell.quality = sample->quality;
        }
        row.cells.push_back(cell);
      } else {
        row.cells.push_back(cells[k]);
      }
    }
    rec.rows.push_back(std::move(row));
  }

  double v_nom = cfg.topology.value("v_nom", 240.0);
  RunResult result;
  result.record = std::move(rec);
  result.metrics = compute_metrics(result.record, v_nom);
  add_common_metrics(result.metrics, cfg, "multi-process");
  result.metrics.add("replication_cycles", cycles_done);
  result.metrics.add("controller_stale_reads",
                     static_cast<int64_t>(controller.stale_reads()));
  return result;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, bool realtime) {
  validate(cfg);
  if (cfg.deployment.mode == DeploymentMode::MultiProcess) {
    return run_multi_process(cfg);
  }
  return run_in_process(cfg, realtime);
}

}  // namespace medsim::harness
