// SPDX-License-Identifier: Apache-2.0
//
// medsim: multi-energy district co-simulation testbed.
//
//   run       execute a scenario and write record.csv / metrics.txt
//   serve     host one research infrastructure (or the cloud store) over REST
//   validate  parse a config and print the wired topology
//   metrics   recompute record-derived metrics from a record.csv
//   emit-config / catalog   write the shipped defaults to files

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "medsim/harness.hpp"
#include "medsim/nodes.hpp"
#include "medsim/uapi.hpp"
#include "medsim/util.hpp"

namespace fs = std::filesystem;
using namespace medsim;

static harness::ScenarioConfig load_config(const std::string& config_path,
                                           const std::string& scenario) {
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw harness::ConfigError("cannot open config " + config_path);
    auto j = nlohmann::json::parse(in);
    auto cfg = harness::scenario_from_json(j);
    if (!scenario.empty() &&
        harness::scenario_kind_from_string(scenario) != cfg.kind) {
      throw harness::ConfigError("--scenario disagrees with the config file");
    }
    return cfg;
  }
  if (scenario.empty()) {
    throw harness::ConfigError("either --scenario or --config is required");
  }
  return harness::default_scenario(
      harness::scenario_kind_from_string(scenario));
}

static int cmd_run(const std::string& config_path, const std::string& scenario,
                   const std::string& out_dir, int64_t seed, bool has_seed,
                   const std::string& mode, bool realtime) {
  auto cfg = load_config(config_path, scenario);
  if (has_seed) cfg.seed = static_cast<uint64_t>(seed);
  if (mode == "in-process") {
    cfg.deployment.mode = harness::DeploymentMode::InProcess;
  } else if (mode == "multi-process") {
    cfg.deployment.mode = harness::DeploymentMode::MultiProcess;
  } else if (!mode.empty()) {
    throw harness::ConfigError("unknown --mode " + mode);
  }

  auto result = harness::run_scenario(cfg, realtime);

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "record.csv");
    harness::write_record_csv(result.record, out);
  }
  {
    std::ofstream out(fs::path(out_dir) / "metrics.txt");
    harness::write_metrics(result.metrics, out);
  }
  {
    std::ofstream out(fs::path(out_dir) / "config_echo.json");
    out << harness::scenario_to_json(cfg).dump(2) << '\n';
  }
  std::cout << "run complete: " << result.record.rows.size() << " rows, "
            << "config " << to_hex(harness::config_hash(cfg)) << "\n";
  for (const char* key :
       {"pcc2_max_rise_pct", "pcc4_max_rise_pct", "pcc2_min_rise_pct",
        "pcc4_min_rise_pct", "soc_delta_pct", "dtu_heat_energy_kwh"}) {
    if (auto v = result.metrics.get(key)) {
      std::cout << "  " << key << "=" << *v << "\n";
    }
  }
  return 0;
}

static int cmd_validate(const std::string& config_path,
                        const std::string& scenario) {
  auto cfg = load_config(config_path, scenario);
  harness::validate(cfg);
  auto model = grid::load_topology(cfg.topology);

  std::cout << "scenario: " << harness::to_string(cfg.kind) << "\n"
            << "duration: " << cfg.duration_s << " s, dt " << cfg.dt_s
            << " s, exchange " << cfg.exchange_rate_hz << " Hz\n"
            << "config hash: " << to_hex(harness::config_hash(cfg)) << "\n"
            << "feeder tree (" << model.bus_names.size() << " buses):\n";
  // Indented tree of the feeder, children under their parents.
  std::vector<std::vector<int>> children(model.bus_names.size());
  for (size_t i = 1; i < model.bus_names.size(); ++i) {
    children[model.parent[i]].push_back(static_cast<int>(i));
  }
  std::function<void(int, int)> dump = [&](int bus, int depth) {
    std::cout << std::string(2 * depth + 2, ' ') << model.bus_names[bus];
    if (bus != 0) {
      auto z = model.branch_z[bus];
      std::cout << "  (r " << z.real() << " ohm, x " << z.imag() << " ohm)";
    } else {
      std::cout << "  (slack, " << model.v_nom << " V)";
    }
    for (const auto& [name, b] : model.attachments) {
      if (b == bus) std::cout << " [" << name << "]";
    }
    std::cout << "\n";
    for (int c : children[bus]) dump(c, depth + 1);
  };
  dump(0, 0);
  std::cout << "profiles: " << cfg.profiles.series.size() << " series\n";
  for (const auto& s : cfg.profiles.series) {
    std::cout << "  " << s.name << " @ " << s.bus << ", " << s.points.size()
              << " breakpoints\n";
  }
  std::cout << "ok\n";
  return 0;
}

static int cmd_metrics(const std::string& record_path, double v_nom) {
  std::ifstream in(record_path);
  if (!in) {
    std::cerr << "cannot open record " << record_path << "\n";
    return 1;
  }
  auto rec = harness::read_record_csv(in);
  auto m = harness::compute_metrics(rec, v_nom);
  harness::write_metrics(m, std::cout);
  return 0;
}

int main(int argc, char** argv) {
  CLI::App app{"multi-energy district co-simulation testbed"};
  app.require_subcommand(1);

  std::string config_path, scenario, out_dir = "out", mode, host = "127.0.0.1";
  std::string ns, record_path, out_file;
  int64_t seed = 0;
  int port = 8700;
  double v_nom = 240.0;
  bool realtime = false;

  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("--scenario", scenario, "overvoltage|undervoltage");
  run->add_option("--config", config_path, "scenario config file");
  run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "override the seed");
  run->add_option("--mode", mode, "in-process|multi-process");
  run->add_flag("--realtime", realtime, "pace ticks at wall-clock dt");

  auto* serve = app.add_subcommand("serve", "host one RI (or CLOUD) over REST");
  serve->add_option("--namespace", ns, "SIN|RSE|CRES|DTU|TUD|CLOUD")
      ->required();
  serve->add_option("--config", config_path, "scenario config file");
  serve->add_option("--scenario", scenario, "overvoltage|undervoltage");
  serve->add_option("--port", port, "listen port")->required();
  serve->add_option("--host", host, "listen address");

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "scenario config file");
  validate->add_option("--scenario", scenario, "overvoltage|undervoltage");

  auto* metrics = app.add_subcommand("metrics", "metrics from a record.csv");
  metrics->add_option("--record", record_path, "record.csv path")->required();
  metrics->add_option("--v-nom", v_nom, "nominal voltage");

  auto* emit = app.add_subcommand("emit-config", "write the shipped defaults");
  emit->add_option("--scenario", scenario, "overvoltage|undervoltage")
      ->required();
  emit->add_option("--out", out_file, "output file (default stdout)");

  auto* catalog = app.add_subcommand("catalog", "write the signal catalog");
  catalog->add_option("--out", out_file, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, scenario, out_dir, seed, !seed_opt->empty(),
                     mode, realtime);
    }
    if (serve->parsed()) {
      auto cfg = load_config(config_path, scenario);
      return harness::serve_node(ns, cfg, host, port);
    }
    if (validate->parsed()) return cmd_validate(config_path, scenario);
    if (metrics->parsed()) return cmd_metrics(record_path, v_nom);
    if (emit->parsed()) {
      auto cfg = harness::default_scenario(
          harness::scenario_kind_from_string(scenario));
      auto text = harness::scenario_to_json(cfg).dump(2) + "\n";
      if (out_file.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(out_file);
        out << text;
      }
      return 0;
    }
    if (catalog->parsed()) {
      signals::SignalRegistry reg;
      signals::populate_default_catalog(reg);
      if (out_file.empty()) {
        signals::write_catalog(reg, std::cout);
      } else {
        std::ofstream out(out_file);
        signals::write_catalog(reg, out);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "medsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
