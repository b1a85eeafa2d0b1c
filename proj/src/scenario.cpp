// SPDX-License-Identifier: Apache-2.0
#include "medsim/scenario.hpp"

#include "medsim/rng.hpp"
#include "medsim/util.hpp"

namespace medsim::harness {

using nlohmann::json;

std::string_view to_string(csc::ScenarioKind k) {
  return k == csc::ScenarioKind::Overvoltage ? "overvoltage" : "undervoltage";
}

csc::ScenarioKind scenario_kind_from_string(std::string_view s) {
  if (s == "overvoltage") return csc::ScenarioKind::Overvoltage;
  if (s == "undervoltage") return csc::ScenarioKind::Undervoltage;
  throw ConfigError("unknown scenario kind: " + std::string(s));
}

repl::LinkConfig ScenarioConfig::link_config(uint64_t stream_seed) const {
  repl::LinkConfig lc;
  lc.period_ms = exchange_period_ms();
  lc.latency_ms = link_latency_ms;
  lc.jitter_ms = link_jitter_ms;
  lc.drop_probability = link_drop_probability;
  lc.seed = stream_seed;
  return lc;
}

static json default_topology() {
  // Benchmark LV feeder: slack (transformer secondary) feeding the four
  // coupling points along the main line. Battery at PCC2, CHP and heat pump
  // at PCC4. Branch impedances are not published for the study; these are
  // per-length values of a typical LV residential trunk and live here in
  // the config so exact benchmark data can be substituted.
  return json{
      {"v_nom", 240.0},
      {"f_nom", 50.0},
      {"buses", {"slack", "PCC1", "PCC2", "PCC3", "PCC4"}},
      {"branches",
       {{{"from", "slack"}, {"to", "PCC1"}, {"r_ohm", 0.020}, {"x_ohm", 0.010}},
        {{"from", "PCC1"}, {"to", "PCC2"}, {"r_ohm", 0.018}, {"x_ohm", 0.009}},
        {{"from", "PCC2"}, {"to", "PCC3"}, {"r_ohm", 0.004}, {"x_ohm", 0.002}},
        {{"from", "PCC3"}, {"to", "PCC4"}, {"r_ohm", 0.004}, {"x_ohm", 0.002}}}},
      {"attachments",
       {{"BESS", "PCC2"}, {"CHP", "PCC4"}, {"EHP", "PCC4"}}}};
}

static grid::ProfileSet overvoltage_profiles() {
  // High PV, low demand: generation ramps up mid-run and pushes the rise at
  // PCC2/PCC4 past the +5 % band, then falls away toward the end.
  grid::ProfileSet p;
  auto load = [&](const char* name, const char* bus, double kw) {
    p.series.push_back({name, bus, {{0, kw, kw * 0.33}}});
  };
  load("L1", "PCC4", 1.5);
  load("L2", "PCC4", 1.5);
  load("L3", "PCC3", 1.5);
  load("L4", "PCC2", 1.5);
  load("L5", "PCC1", 1.5);
  auto pv = [&](const char* name, const char* bus, double peak_kw) {
    p.series.push_back({name,
                        bus,
                        {{0, 0, 0},
                         {60, 0, 0},
                         {240, -peak_kw, 0},
                         {780, -peak_kw, 0},
                         {900, 0, 0}}});
  };
  pv("PV1", "PCC4", 28.0);
  pv("PV2", "PCC4", 24.0);
  pv("PV3", "PCC3", 24.0);
  pv("PV4", "PCC2", 32.0);
  return p;
}

static grid::ProfileSet undervoltage_profiles() {
  // No PV, heavy demand: consumption ramps up and drags PCC2/PCC4 below the
  // -5 % band, easing off near the end of the run.
  grid::ProfileSet p;
  auto load = [&](const char* name, const char* bus, double peak_kw) {
    double base = peak_kw * 0.2;
    p.series.push_back({name,
                        bus,
                        {{0, base, base * 0.33},
                         {120, base, base * 0.33},
                         {420, peak_kw, peak_kw * 0.33},
                         {1440, peak_kw, peak_kw * 0.33},
                         {1560, base, base * 0.33}}});
  };
  load("L1", "PCC4", 24.0);
  load("L2", "PCC4", 20.0);
  load("L3", "PCC3", 16.0);
  load("L4", "PCC2", 14.0);
  load("L5", "PCC1", 6.0);
  return p;
}

ScenarioConfig default_scenario(csc::ScenarioKind kind) {
  ScenarioConfig cfg;
  cfg.kind = kind;
  cfg.topology = default_topology();
  if (kind == csc::ScenarioKind::Overvoltage) {
    cfg.duration_s = 960.0;
    cfg.profiles = overvoltage_profiles();
    cfg.controller.activate_pct = 5.0;
  } else {
    cfg.duration_s = 1680.0;
    cfg.profiles = undervoltage_profiles();
    cfg.controller.activate_pct = -5.0;
  }
  cfg.controller.deactivate_pct = 0.0;
  return cfg;
}

void validate(const ScenarioConfig& cfg) {
  if (!(cfg.exchange_rate_hz >= 1.0 && cfg.exchange_rate_hz <= 2.0)) {
    throw ConfigError("exchange_rate_hz must be within [1, 2]");
  }
  if (!(cfg.dt_s > 0.0)) throw ConfigError("dt_s must be > 0");
  if (cfg.dt_s > 1.0 / cfg.exchange_rate_hz + 1e-9) {
    throw ConfigError("dt_s must not exceed the exchange period");
  }
  if (cfg.duration_s < 0.0) throw ConfigError("duration_s must be >= 0");
  if (!(cfg.link_drop_probability >= 0.0 && cfg.link_drop_probability < 1.0)) {
    throw ConfigError("link drop_probability must be in [0, 1)");
  }
  if (cfg.link_latency_ms < 0 || cfg.link_jitter_ms < 0) {
    throw ConfigError("link latency/jitter must be >= 0");
  }
  auto band = csc::band_for(cfg.controller, cfg.kind);
  if (!band.valid()) {
    throw ConfigError("hysteresis thresholds do not match the scenario sense");
  }
  try {
    auto model = grid::load_topology(cfg.topology);
    for (const auto& s : cfg.profiles.series) model.bus(s.bus);
    model.attachment_bus("BESS");
    model.attachment_bus("CHP");
    model.attachment_bus("EHP");
  } catch (const std::exception& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
  if (cfg.deployment.mode == DeploymentMode::MultiProcess) {
    for (const char* ns : {"SIN", "RSE", "CRES", "DTU", "TUD", "CLOUD"}) {
      if (!cfg.deployment.endpoints.count(ns)) {
        throw ConfigError(std::string("multi-process deployment needs an "
                                      "endpoint for ") +
                          ns);
      }
    }
  }
}

json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["kind"] = std::string(to_string(cfg.kind));
  j["duration_s"] = cfg.duration_s;
  j["dt_s"] = cfg.dt_s;
  j["exchange_rate_hz"] = cfg.exchange_rate_hz;
  j["seed"] = cfg.seed;
  j["staleness_horizon_ms"] = cfg.staleness_horizon_ms;
  j["link"] = {{"latency_ms", cfg.link_latency_ms},
               {"jitter_ms", cfg.link_jitter_ms},
               {"drop_probability", cfg.link_drop_probability}};
  j["grid"] = cfg.topology;
  j["profiles"] = grid::profiles_to_json(cfg.profiles);
  j["devices"] = {
      {"bess",
       {{"e_cap_kwh", cfg.bess.e_cap_kwh},
        {"p_max_kw", cfg.bess.p_max_kw},
        {"q_max_kvar", cfg.bess.q_max_kvar},
        {"initial_soc_pct", cfg.bess.initial_soc_pct}}},
      {"chp",
       {{"p_th_min_kw", cfg.chp.p_th_min_kw},
        {"p_th_max_kw", cfg.chp.p_th_max_kw},
        {"el_th_ratio", cfg.chp.el_th_ratio},
        {"q_max_kvar", cfg.chp.q_max_kvar}}},
      {"ehp",
       {{"p_el_kw", cfg.ehp.p_el_kw},
        {"cop", cfg.ehp.cop},
        {"p_th_max_kw", cfg.ehp.p_th_max_kw}}}};
  j["controller"] = {{"activate_pct", cfg.controller.activate_pct},
                     {"deactivate_pct", cfg.controller.deactivate_pct},
                     {"bess_charge_cmd_kw", cfg.controller.bess_charge_cmd_kw},
                     {"chp_p_th_cmd_kw", cfg.controller.chp_p_th_cmd_kw},
                     {"case2_precharge_kw", cfg.controller.case2_precharge_kw},
                     {"droop_enabled", cfg.controller.droop_enabled},
                     {"droop_kvar_per_pct", cfg.controller.droop_kvar_per_pct},
                     {"droop_deadband_pct", cfg.controller.droop_deadband_pct},
                     {"bess_q_limit_kvar", cfg.controller.bess_q_limit_kvar},
                     {"rse_q_limit_kvar", cfg.controller.rse_q_limit_kvar}};
  j["thermal"] = {
      {"tank",
       {{"volume_l", cfg.dhn.tank.volume_l},
        {"ua_w_per_k", cfg.dhn.tank.ua_w_per_k},
        {"ambient_c", cfg.dhn.tank.ambient_c}}},
      {"pipe",
       {{"length_m", cfg.dhn.pipe.length_m},
        {"area_m2", cfg.dhn.pipe.area_m2},
        {"mass_flow_kg_s", cfg.dhn.pipe.mass_flow_kg_s},
        {"loss_rate_per_s", cfg.dhn.pipe.loss_rate_per_s},
        {"ambient_c", cfg.dhn.pipe.ambient_c}}},
      {"consumer_demand_kw", cfg.dhn.consumer_demand_kw},
      {"initial_temp_c", cfg.dhn.initial_temp_c},
      {"cres",
       {{"heat_capacity_j_per_k", cfg.cres.heat_capacity_j_per_k},
        {"ua_w_per_k", cfg.cres.ua_w_per_k},
        {"ambient_c", cfg.cres.ambient_c},
        {"demand_kw", cfg.cres.demand_kw}}}};
  json endpoints = json::object();
  for (const auto& [ns, url] : cfg.deployment.endpoints) endpoints[ns] = url;
  j["deployment"] = {
      {"mode", cfg.deployment.mode == DeploymentMode::InProcess
                   ? "in-process"
                   : "multi-process"},
      {"endpoints", endpoints}};
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg = default_scenario(
      scenario_kind_from_string(j.at("kind").get<std::string>()));
  cfg.duration_s = j.value("duration_s", cfg.duration_s);
  cfg.dt_s = j.value("dt_s", cfg.dt_s);
  cfg.exchange_rate_hz = j.value("exchange_rate_hz", cfg.exchange_rate_hz);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.staleness_horizon_ms =
      j.value("staleness_horizon_ms", cfg.staleness_horizon_ms);
  if (j.contains("link")) {
    const auto& l = j["link"];
    cfg.link_latency_ms = l.value("latency_ms", cfg.link_latency_ms);
    cfg.link_jitter_ms = l.value("jitter_ms", cfg.link_jitter_ms);
    cfg.link_drop_probability =
        l.value("drop_probability", cfg.link_drop_probability);
  }
  if (j.contains("grid")) cfg.topology = j["grid"];
  if (j.contains("profiles")) cfg.profiles = grid::load_profiles(j["profiles"]);
  if (j.contains("devices")) {
    const auto& d = j["devices"];
    if (d.contains("bess")) {
      const auto& b = d["bess"];
      cfg.bess.e_cap_kwh = b.value("e_cap_kwh", cfg.bess.e_cap_kwh);
      cfg.bess.p_max_kw = b.value("p_max_kw", cfg.bess.p_max_kw);
      cfg.bess.q_max_kvar = b.value("q_max_kvar", cfg.bess.q_max_kvar);
      cfg.bess.initial_soc_pct =
          b.value("initial_soc_pct", cfg.bess.initial_soc_pct);
    }
    if (d.contains("chp")) {
      const auto& c = d["chp"];
      cfg.chp.p_th_min_kw = c.value("p_th_min_kw", cfg.chp.p_th_min_kw);
      cfg.chp.p_th_max_kw = c.value("p_th_max_kw", cfg.chp.p_th_max_kw);
      cfg.chp.el_th_ratio = c.value("el_th_ratio", cfg.chp.el_th_ratio);
      cfg.chp.q_max_kvar = c.value("q_max_kvar", cfg.chp.q_max_kvar);
    }
    if (d.contains("ehp")) {
      const auto& e = d["ehp"];
      cfg.ehp.p_el_kw = e.value("p_el_kw", cfg.ehp.p_el_kw);
      cfg.ehp.cop = e.value("cop", cfg.ehp.cop);
      cfg.ehp.p_th_max_kw = e.value("p_th_max_kw", cfg.ehp.p_th_max_kw);
    }
  }
  if (j.contains("controller")) {
    const auto& c = j["controller"];
    auto& cc = cfg.controller;
    cc.activate_pct = c.value("activate_pct", cc.activate_pct);
    cc.deactivate_pct = c.value("deactivate_pct", cc.deactivate_pct);
    cc.bess_charge_cmd_kw = c.value("bess_charge_cmd_kw", cc.bess_charge_cmd_kw);
    cc.chp_p_th_cmd_kw = c.value("chp_p_th_cmd_kw", cc.chp_p_th_cmd_kw);
    cc.case2_precharge_kw = c.value("case2_precharge_kw", cc.case2_precharge_kw);
    cc.droop_enabled = c.value("droop_enabled", cc.droop_enabled);
    cc.droop_kvar_per_pct = c.value("droop_kvar_per_pct", cc.droop_kvar_per_pct);
    cc.droop_deadband_pct = c.value("droop_deadband_pct", cc.droop_deadband_pct);
    cc.bess_q_limit_kvar = c.value("bess_q_limit_kvar", cc.bess_q_limit_kvar);
    cc.rse_q_limit_kvar = c.value("rse_q_limit_kvar", cc.rse_q_limit_kvar);
  }
  if (j.contains("thermal")) {
    const auto& t = j["thermal"];
    if (t.contains("tank")) {
      const auto& tk = t["tank"];
      cfg.dhn.tank.volume_l = tk.value("volume_l", cfg.dhn.tank.volume_l);
      cfg.dhn.tank.ua_w_per_k = tk.value("ua_w_per_k", cfg.dhn.tank.ua_w_per_k);
      cfg.dhn.tank.ambient_c = tk.value("ambient_c", cfg.dhn.tank.ambient_c);
    }
    if (t.contains("pipe")) {
      const auto& p = t["pipe"];
      cfg.dhn.pipe.length_m = p.value("length_m", cfg.dhn.pipe.length_m);
      cfg.dhn.pipe.area_m2 = p.value("area_m2", cfg.dhn.pipe.area_m2);
      cfg.dhn.pipe.mass_flow_kg_s =
          p.value("mass_flow_kg_s", cfg.dhn.pipe.mass_flow_kg_s);
      cfg.dhn.pipe.loss_rate_per_s =
          p.value("loss_rate_per_s", cfg.dhn.pipe.loss_rate_per_s);
      cfg.dhn.pipe.ambient_c = p.value("ambient_c", cfg.dhn.pipe.ambient_c);
    }
    cfg.dhn.consumer_demand_kw =
        t.value("consumer_demand_kw", cfg.dhn.consumer_demand_kw);
    cfg.dhn.initial_temp_c = t.value("initial_temp_c", cfg.dhn.initial_temp_c);
    if (t.contains("cres")) {
      const auto& c = t["cres"];
      cfg.cres.heat_capacity_j_per_k =
          c.value("heat_capacity_j_per_k", cfg.cres.heat_capacity_j_per_k);
      cfg.cres.ua_w_per_k = c.value("ua_w_per_k", cfg.cres.ua_w_per_k);
      cfg.cres.ambient_c = c.value("ambient_c", cfg.cres.ambient_c);
      cfg.cres.demand_kw = c.value("demand_kw", cfg.cres.demand_kw);
    }
  }
  if (j.contains("deployment")) {
    const auto& d = j["deployment"];
    std::string mode = d.value("mode", "in-process");
    cfg.deployment.mode = mode == "multi-process" ? DeploymentMode::MultiProcess
                                                  : DeploymentMode::InProcess;
    if (d.contains("endpoints")) {
      for (const auto& [ns, url] : d["endpoints"].items()) {
        cfg.deployment.endpoints[ns] = url.get<std::string>();
      }
    }
  }
  return cfg;
}

uint64_t config_hash(const ScenarioConfig& cfg) {
  return fnv1a64(scenario_to_json(cfg).dump());
}

}  // namespace medsim::harness
