// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "medsim/controller.hpp"
#include "medsim/devices.hpp"
#include "medsim/grid.hpp"
#include "medsim/profiles.hpp"
#include "medsim/replication.hpp"
#include "medsim/scenario.hpp"
#include "medsim/thermal.hpp"

namespace medsim::harness {

// Commands the devices assume before the first controller output arrives
// (in the undervoltage case the heat pump runs and the battery pre-charges).
csc::CommandSet initial_commands(const ScenarioConfig& cfg);

// Which node captures each signal. Every key has exactly one writer.
const std::map<signals::SignalKey, std::string>& signal_owners();

// One research infrastructure emulator. A node only ever touches its own
// replica; everything it knows about the others arrived via replication.
// The same classes run embedded in the single-process harness and behind a
// REST service in multi-process mode, so the two layouts share semantics.
class RiNode {
 public:
  RiNode(std::string node_id, const ScenarioConfig& cfg);
  virtual ~RiNode() = default;

  // Fast phase: consume setpoints from the replica, advance the emulator,
  // publish measurements locally.
  virtual void step(int64_t tick, int64_t time_ms) = 0;
  // Slow phase, after the replication cycle: thermal subsystems.
  virtual void thermal_step(int64_t tick, int64_t time_ms);

  virtual std::vector<signals::SignalKey> subscriptions() const = 0;

  repl::NodeStore& store() { return store_; }
  const std::string& id() const { return store_.node_id; }

 protected:
  void publish(const signals::keys::Key& key, double value, int64_t time_ms);
  double read_or(const signals::keys::Key& key, double fallback) const;
  bool read_flag(const signals::keys::Key& key, bool fallback) const;

  ScenarioConfig cfg_;
  repl::NodeStore store_;
  csc::CommandSet initial_;
};

// TUD: the distribution grid. Applies the load/PV profiles and the device
// powers known from replication, solves the feeder and publishes the PCC
// voltage and frequency references.
class TudGridNode : public RiNode {
 public:
  TudGridNode(const ScenarioConfig& cfg);
  void step(int64_t tick, int64_t time_ms) override;
  std::vector<signals::SignalKey> subscriptions() const override;

  int not_converged_count() const { return not_converged_; }
  bool profile_past_end() const { return profile_past_end_; }

 private:
  grid::GridModel model_;
  int bess_bus_;
  int pcc4_bus_;
  int not_converged_ = 0;
  bool profile_past_end_ = false;
};

// SINTEF: battery behind its converter, tracking the active/reactive
// setpoints and publishing applied power and state of charge.
class SinBessNode : public RiNode {
 public:
  SinBessNode(const ScenarioConfig& cfg);
  void step(int64_t tick, int64_t time_ms) override;
  std::vector<signals::SignalKey> subscriptions() const override;

 private:
  devices::BessState bess_;
};

// RSE: the CHP plant plus the PCC4 electrical aggregation (the heat pump's
// electrical draw feeds through this coupling point, known via the
// replicated enable signal).
class RseChpNode : public RiNode {
 public:
  RseChpNode(const ScenarioConfig& cfg);
  void step(int64_t tick, int64_t time_ms) override;
  std::vector<signals::SignalKey> subscriptions() const override;

 private:
  devices::ChpState chp_;
};

// CRES: the electrical heat pump and the building thermal node it feeds.
class CresEhpNode : public RiNode {
 public:
  CresEhpNode(const ScenarioConfig& cfg);
  void step(int64_t tick, int64_t time_ms) override;
  void thermal_step(int64_t tick, int64_t time_ms) override;
  std::vector<signals::SignalKey> subscriptions() const override;

 private:
  devices::EhpState ehp_;
  thermal::CresNode node_;
};

// DTU: the coupling unit (range mapping) and the district heating loop.
class DtuHeatNode : public RiNode {
 public:
  DtuHeatNode(const ScenarioConfig& cfg);
  void step(int64_t tick, int64_t time_ms) override;
  void thermal_step(int64_t tick, int64_t time_ms) override;
  std::vector<signals::SignalKey> subscriptions() const override;

  const thermal::DistrictHeatingNetwork& dhn() const { return dhn_; }

 private:
  thermal::DistrictHeatingNetwork dhn_;
};

std::unique_ptr<RiNode> make_node(const std::string& ns,
                                  const ScenarioConfig& cfg);

// The supervisory controller: reads the PCC voltages from its replica,
// runs the scenario's hysteresis logic and writes the command set back
// through the middleware. Lives in the harness process in both layouts.
class ControllerRuntime {
 public:
  explicit ControllerRuntime(const ScenarioConfig& cfg);

  void control_step(int64_t time_ms);

  repl::NodeStore& store() { return store_; }
  std::vector<signals::SignalKey> subscriptions() const;
  const csc::ControllerState& state() const { return state_; }
  int stale_reads() const { return stale_reads_; }

 private:
  void write_commands(const csc::CommandSet& cmd, int64_t time_ms);

  ScenarioConfig cfg_;
  repl::NodeStore store_;
  csc::ControllerState state_;
  int stale_reads_ = 0;
};

inline const char* kRiNamespaces[] = {"TUD", "SIN", "RSE", "CRES", "DTU"};

}  // namespace medsim::harness
