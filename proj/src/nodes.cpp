// SPDX-License-Identifier: Apache-2.0
#include "medsim/nodes.hpp"

#include <algorithm>
#include <cmath>

namespace medsim::harness {

using signals::SignalKey;
namespace keys = signals::keys;

csc::CommandSet initial_commands(const ScenarioConfig& cfg) {
  auto quiet = cfg.controller;
  quiet.droop_enabled = false;
  csc::ControllerState st;
  return cfg.kind == csc::ScenarioKind::Overvoltage
             ? csc::step_case1(quiet, st, 0.0, 0.0)
             : csc::step_case2(quiet, st, 0.0, 0.0);
}

const std::map<SignalKey, std::string>& signal_owners() {
  static const std::map<SignalKey, std::string> owners = {
      {keys::pcc2_voltage, "TUD"},       {keys::pcc2_frequency, "TUD"},
      {keys::pcc4_voltage, "TUD"},       {keys::pcc4_frequency, "TUD"},
      {keys::bess_active_power, "SIN"},  {keys::bess_reactive_power, "SIN"},
      {keys::bess_soc, "SIN"},           {keys::rse_active_power, "RSE"},
      {keys::rse_reactive_power, "RSE"}, {keys::chp_thermal_power, "RSE"},
      {keys::ehp_thermal_power, "CRES"}, {keys::cres_temperature, "CRES"},
      {keys::dtu_heat_setpoint, "DTU"},  {keys::dtu_temperature, "DTU"},
      {keys::bess_active_setpoint, "CSC"},
      {keys::bess_reactive_setpoint, "CSC"},
      {keys::rse_reactive_setpoint, "CSC"},
      {keys::chp_thermal_setpoint, "CSC"},
      {keys::chp_enable, "CSC"},
      {keys::ehp_enable, "CSC"},
  };
  return owners;
}

RiNode::RiNode(std::string node_id, const ScenarioConfig& cfg)
    : cfg_(cfg), initial_(initial_commands(cfg)) {
  store_.node_id = std::move(node_id);
  signals::populate_default_catalog(store_.registry);
}

void RiNode::thermal_step(int64_t, int64_t) {}

void RiNode::publish(const keys::Key& key, double value, int64_t time_ms) {
  auto id = store_.registry.find(key.ns, key.name);
  store_.registry.write(*id, value, time_ms, store_.node_id);
}

double RiNode::read_or(const keys::Key& key, double fallback) const {
  auto id = store_.registry.find(key.ns, key.name);
  auto s = store_.registry.read(*id);
  return s ? s->value : fallback;
}

bool RiNode::read_flag(const keys::Key& key, bool fallback) const {
  return read_or(key, fallback ? 1.0 : 0.0) > 0.5;
}

// --------------------------------------------------------------------- TUD

TudGridNode::TudGridNode(const ScenarioConfig& cfg)
    : RiNode("TUD", cfg), model_(grid::load_topology(cfg.topology)) {
  bess_bus_ = model_.attachment_bus("BESS");
  pcc4_bus_ = model_.attachment_bus("CHP");
}

void TudGridNode::step(int64_t, int64_t time_ms) {
  double t_s = static_cast<double>(time_ms) / 1000.0;
  bool past = false;
  auto injections = cfg_.profiles.injections_at(model_, t_s, &past);
  profile_past_end_ = profile_past_end_ || past;

  // Device powers as known from the middleware; absent means the source has
  // not published yet and contributes nothing.
  injections.push_back({bess_bus_, read_or(keys::bess_active_power, 0.0),
                        read_or(keys::bess_reactive_power, 0.0)});
  injections.push_back({pcc4_bus_, read_or(keys::rse_active_power, 0.0),
                        read_or(keys::rse_reactive_power, 0.0)});

  auto state = grid::solve_power_flow(model_, injections);
  if (!state.converged) ++not_converged_;

  publish(keys::pcc2_voltage, std::abs(state.v[bess_bus_]), time_ms);
  publish(keys::pcc4_voltage, std::abs(state.v[pcc4_bus_]), time_ms);
  publish(keys::pcc2_frequency, model_.f_nom, time_ms);
  publish(keys::pcc4_frequency, model_.f_nom, time_ms);
}

std::vector<SignalKey> TudGridNode::subscriptions() const {
  return {keys::bess_active_power, keys::bess_reactive_power,
          keys::rse_active_power, keys::rse_reactive_power};
}

// --------------------------------------------------------------------- SIN

SinBessNode::SinBessNode(const ScenarioConfig& cfg) : RiNode("SIN", cfg) {
  bess_.soc_pct = cfg.bess.initial_soc_pct;
}

void SinBessNode::step(int64_t, int64_t time_ms) {
  double p_ref = read_or(keys::bess_active_setpoint, initial_.bess_p_ref_kw);
  double q_ref = read_or(keys::bess_reactive_setpoint, 0.0);
  double applied = devices::bess_step(cfg_.bess, bess_, p_ref, cfg_.dt_s);
  bess_.q_applied_kvar =
      std::clamp(q_ref, -cfg_.bess.q_max_kvar, cfg_.bess.q_max_kvar);

  publish(keys::bess_active_power, applied, time_ms);
  publish(keys::bess_reactive_power, bess_.q_applied_kvar, time_ms);
  publish(keys::bess_soc, bess_.soc_pct, time_ms);
}

std::vector<SignalKey> SinBessNode::subscriptions() const {
  return {keys::bess_active_setpoint, keys::bess_reactive_setpoint,
          keys::pcc2_voltage, keys::pcc2_frequency};
}

// --------------------------------------------------------------------- RSE

RseChpNode::RseChpNode(const ScenarioConfig& cfg) : RiNode("RSE", cfg) {}

void RseChpNode::step(int64_t, int64_t time_ms) {
  bool on_cmd = read_flag(keys::chp_enable, initial_.chp_on);
  double p_th_ref =
      read_or(keys::chp_thermal_setpoint, initial_.chp_p_th_ref_kw);
  devices::chp_step(cfg_.chp, chp_, on_cmd, p_th_ref);

  // The heat pump's electrical draw lands on this coupling point; its state
  // is known from the replicated enable signal.
  bool ehp_on = read_flag(keys::ehp_enable, initial_.ehp_on);
  double ehp_el = ehp_on ? cfg_.ehp.p_el_kw : 0.0;

  double q_ref = read_or(keys::rse_reactive_setpoint, 0.0);
  double q_applied =
      std::clamp(q_ref, -cfg_.chp.q_max_kvar, cfg_.chp.q_max_kvar);

  publish(keys::rse_active_power, chp_.p_el_kw + ehp_el, time_ms);
  publish(keys::rse_reactive_power, q_applied, time_ms);
  // When the plant is off the raw 0 kW clamps to the band's lower edge,
  // which the range mapping sends to zero heat anyway.
  publish(keys::chp_thermal_power, chp_.p_th_kw, time_ms);
}

std::vector<SignalKey> RseChpNode::subscriptions() const {
  return {keys::chp_enable,        keys::chp_thermal_setpoint,
          keys::rse_reactive_setpoint, keys::ehp_enable,
          keys::pcc4_voltage,      keys::pcc4_frequency};
}

// -------------------------------------------------------------------- CRES

CresEhpNode::CresEhpNode(const ScenarioConfig& cfg) : RiNode("CRES", cfg) {
  node_.cfg = cfg.cres;
  node_.temp_c = 40.0;
}

void CresEhpNode::step(int64_t, int64_t time_ms) {
  bool on_cmd = read_flag(keys::ehp_enable, initial_.ehp_on);
  devices::ehp_step(cfg_.ehp, ehp_, on_cmd);
  publish(keys::ehp_thermal_power, ehp_.p_th_kw, time_ms);
}

void CresEhpNode::thermal_step(int64_t, int64_t time_ms) {
  node_.step(ehp_.on, ehp_.p_th_kw, cfg_.dt_s);
  publish(keys::cres_temperature, node_.temp_c, time_ms);
}

std::vector<SignalKey> CresEhpNode::subscriptions() const {
  return {keys::ehp_enable};
}

// --------------------------------------------------------------------- DTU

DtuHeatNode::DtuHeatNode(const ScenarioConfig& cfg)
    : RiNode("DTU", cfg), dhn_(cfg.dhn) {}

void DtuHeatNode::step(int64_t, int64_t) {}

void DtuHeatNode::thermal_step(int64_t, int64_t time_ms) {
  // Coupling unit: scale the plant's thermal output onto the heat source
  // range. Values arrive clamped to the plant band; no sample yet means the
  // plant has not reported and the source stays cold.
  double p_th_chp = read_or(keys::chp_thermal_power, 0.0);
  double setpoint = devices::map_chp_to_dtu(p_th_chp);
  publish(keys::dtu_heat_setpoint, setpoint, time_ms);

  dhn_.step(setpoint, cfg_.dt_s);
  publish(keys::dtu_temperature, dhn_.tank_temp_c(), time_ms);
}

std::vector<SignalKey> DtuHeatNode::subscriptions() const {
  return {keys::chp_thermal_power};
}

std::unique_ptr<RiNode> make_node(const std::string& ns,
                                  const ScenarioConfig& cfg) {
  if (ns == "TUD") return std::make_unique<TudGridNode>(cfg);
  if (ns == "SIN") return std::make_unique<SinBessNode>(cfg);
  if (ns == "RSE") return std::make_unique<RseChpNode>(cfg);
  if (ns == "CRES") return std::make_unique<CresEhpNode>(cfg);
  if (ns == "DTU") return std::make_unique<DtuHeatNode>(cfg);
  throw ConfigError("unknown RI namespace: " + ns);
}

// --------------------------------------------------------------------- CSC

ControllerRuntime::ControllerRuntime(const ScenarioConfig& cfg) : cfg_(cfg) {
  store_.node_id = "CSC";
  signals::populate_default_catalog(store_.registry);
}

std::vector<SignalKey> ControllerRuntime::subscriptions() const {
  return {keys::pcc2_voltage,      keys::pcc4_voltage,
          keys::bess_soc,          keys::bess_active_power,
          keys::rse_active_power,  keys::dtu_temperature,
          keys::cres_temperature};
}

void ControllerRuntime::control_step(int64_t time_ms) {
  const auto& reg = store_.registry;
  auto v2_id = reg.find(keys::pcc2_voltage.ns, keys::pcc2_voltage.name);
  auto v4_id = reg.find(keys::pcc4_voltage.ns, keys::pcc4_voltage.name);
  auto v2 = reg.read(*v2_id);
  auto v4 = reg.read(*v4_id);

  csc::CommandSet cmd;
  if (!v2 || !v4) {
    // Nothing measured yet: hold the scenario's initial command set.
    cmd = initial_commands(cfg_);
  } else {
    // The loop tolerates stale inputs; act on the last known values and
    // count the occurrences for the run report.
    if (reg.is_stale(*v2_id, time_ms, cfg_.staleness_horizon_ms) ||
        reg.is_stale(*v4_id, time_ms, cfg_.staleness_horizon_ms)) {
      ++stale_reads_;
    }
    double v_nom = cfg_.topology.value("v_nom", 240.0);
    double dev2 = grid::voltage_rise_pct(v2->value, v_nom);
    double dev4 = grid::voltage_rise_pct(v4->value, v_nom);
    cmd = cfg_.kind == csc::ScenarioKind::Overvoltage
              ? csc::step_case1(cfg_.controller, state_, dev2, dev4)
              : csc::step_case2(cfg_.controller, state_, dev2, dev4);
  }
  write_commands(cmd, time_ms);
}

void ControllerRuntime::write_commands(const csc::CommandSet& cmd,
                                       int64_t time_ms) {
  auto put = [&](const keys::Key& key, double value) {
    auto id = store_.registry.find(key.ns, key.name);
    store_.registry.write(*id, value, time_ms, store_.node_id);
  };
  put(keys::bess_active_setpoint, cmd.bess_p_ref_kw);
  // Droop outputs are injection-positive support values; the wire carries
  // the consumption-positive convention.
  put(keys::bess_reactive_setpoint, -cmd.bess_q_support_kvar);
  put(keys::rse_reactive_setpoint, -cmd.rse_q_support_kvar);
  put(keys::chp_enable, cmd.chp_on ? 1.0 : 0.0);
  put(keys::chp_thermal_setpoint, cmd.chp_p_th_ref_kw);
  put(keys::ehp_enable, cmd.ehp_on ? 1.0 : 0.0);
}

}  // namespace medsim::harness
