// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace medsim::grid {

struct TopologyError : std::runtime_error {
  enum class Code { CyclicTopology, UnknownBusReference };
  TopologyError(Code c, const std::string& what)
      : std::runtime_error(what), code(c) {}
  Code code;
};

// Radial low-voltage feeder: a tree of buses rooted at the slack (the
// secondary of the MV/LV transformer), held at the nominal phase voltage.
// Balanced single-phase equivalent; branch impedances in ohms.
struct GridModel {
  std::vector<std::string> bus_names;              // [0] is the slack
  std::vector<int> parent;                         // parent[i], -1 for slack
  std::vector<std::complex<double>> branch_z;      // impedance into bus i
  std::vector<int> order;                          // parents before children
  std::unordered_map<std::string, int> bus_index;
  std::map<std::string, int> attachments;          // device/load/PV -> bus
  double v_nom = 240.0;
  double f_nom = 50.0;

  int bus(const std::string& name) const;
  int attachment_bus(const std::string& name) const;
};

// Positive P = consumption, negative = generation. Positive Q = inductive
// consumption. One convention everywhere; device emulators translate.
struct Injection {
  int bus = 0;
  double p_kw = 0.0;
  double q_kvar = 0.0;
};

struct GridState {
  std::vector<std::complex<double>> v;  // complex bus voltage, volts
  int iterations = 0;
  bool converged = false;
  double max_mismatch_va = 0.0;
};

inline constexpr double kPowerBaseVa = 100e3;   // 100 kVA, ~400 V LV system
inline constexpr double kMismatchTolPu = 1e-6;
inline constexpr int kMaxSweepIterations = 50;

// Topology file schema:
//   { "v_nom": 240.0, "f_nom": 50.0,
//     "buses": ["slack", "PCC1", ...],
//     "branches": [{"from": "slack", "to": "PCC1", "r_ohm": r, "x_ohm": x}],
//     "attachments": {"BESS": "PCC2", ...} }
GridModel load_topology(const nlohmann::json& j);

// Backward/forward sweep on the radial tree. Iterates until the largest
// per-bus complex power mismatch is below kMismatchTolPu (on kPowerBaseVa)
// or kMaxSweepIterations is hit; non-convergence is flagged, not thrown,
// so a harness can log it and keep running.
GridState solve_power_flow(const GridModel& model,
                           const std::vector<Injection>& injections);

// (|V| - v_nom) / v_nom * 100.
double voltage_rise_pct(const GridModel& model, const GridState& state,
                        int bus);
double voltage_rise_pct(double v_mag, double v_nom);

// Complex power drawn at the slack (consumption-positive, in kW/kVAr).
std::complex<double> slack_power_kva(const GridModel& model,
                                     const GridState& state,
                                     const std::vector<Injection>& injections);

}  // namespace medsim::grid
