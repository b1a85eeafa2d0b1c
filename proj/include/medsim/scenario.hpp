// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "medsim/controller.hpp"
#include "medsim/devices.hpp"
#include "medsim/grid.hpp"
#include "medsim/profiles.hpp"
#include "medsim/replication.hpp"
#include "medsim/thermal.hpp"

namespace medsim::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DeploymentMode { InProcess, MultiProcess };

struct DeploymentConfig {
  DeploymentMode mode = DeploymentMode::InProcess;
  // Namespace -> base URL, plus the "CLOUD" store, for multi-process runs.
  std::map<std::string, std::string> endpoints;
};

// Everything one run needs: timing, link behaviour, grid, profiles, device
// and thermal parameters, controller thresholds and the deployment shape.
struct ScenarioConfig {
  csc::ScenarioKind kind = csc::ScenarioKind::Overvoltage;
  double duration_s = 960.0;
  double dt_s = 0.5;
  double exchange_rate_hz = 2.0;  // measurements move at 1-2 Hz
  uint64_t seed = 1;
  int64_t staleness_horizon_ms = 3000;

  // Injected link behaviour (applies to every node-cloud connection; the
  // cycle period always follows the exchange rate).
  int64_t link_latency_ms = 0;
  int64_t link_jitter_ms = 0;
  double link_drop_probability = 0.0;

  nlohmann::json topology;      // grid::load_topology schema
  grid::ProfileSet profiles;

  devices::BessConfig bess;
  devices::ChpConfig chp;
  devices::EhpConfig ehp;

  csc::ControllerConfig controller;

  thermal::DhnConfig dhn;
  thermal::CresNodeConfig cres;

  DeploymentConfig deployment;

  // Derived quantities.
  int64_t dt_ms() const { return static_cast<int64_t>(dt_s * 1000.0 + 0.5); }
  int64_t exchange_period_ms() const {
    return static_cast<int64_t>(1000.0 / exchange_rate_hz + 0.5);
  }
  // A replication cycle runs every `ticks_per_cycle` ticks.
  int64_t ticks_per_cycle() const {
    return std::max<int64_t>(1, exchange_period_ms() / dt_ms());
  }
  int64_t total_ticks() const {
    return static_cast<int64_t>(duration_s / dt_s + 0.5);
  }
  repl::LinkConfig link_config(uint64_t stream_seed) const;
};

// Shipped defaults reproducing the two study cases on the benchmark feeder.
ScenarioConfig default_scenario(csc::ScenarioKind kind);

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

// Structural validation; throws ConfigError with a reason.
void validate(const ScenarioConfig& cfg);

// Fingerprint of the canonical JSON form, recorded with every run.
uint64_t config_hash(const ScenarioConfig& cfg);

std::string_view to_string(csc::ScenarioKind k);
csc::ScenarioKind scenario_kind_from_string(std::string_view s);

}  // namespace medsim::harness
