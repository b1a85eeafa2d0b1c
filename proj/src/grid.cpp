// SPDX-License-Identifier: Apache-2.0
#include "medsim/grid.hpp"

#include <algorithm>
#include <cmath>

namespace medsim::grid {

int GridModel::bus(const std::string& name) const {
  auto it = bus_index.find(name);
  if (it == bus_index.end()) {
    throw TopologyError(TopologyError::Code::UnknownBusReference,
                        "unknown bus " + name);
  }
  return it->second;
}

int GridModel::attachment_bus(const std::string& name) const {
  auto it = attachments.find(name);
  if (it == attachments.end()) {
    throw TopologyError(TopologyError::Code::UnknownBusReference,
                        "unknown attachment " + name);
  }
  return it->second;
}

GridModel load_topology(const nlohmann::json& j) {
  GridModel m;
  m.v_nom = j.value("v_nom", 240.0);
  m.f_nom = j.value("f_nom", 50.0);
  for (const auto& b : j.at("buses")) {
    std::string name = b.get<std::string>();
    if (m.bus_index.count(name)) {
      throw TopologyError(TopologyError::Code::CyclicTopology,
                          "bus declared twice: " + name);
    }
    m.bus_index[name] = static_cast<int>(m.bus_names.size());
    m.bus_names.push_back(name);
  }
  const int n = static_cast<int>(m.bus_names.size());
  if (n == 0) throw std::runtime_error("topology has no buses");

  m.parent.assign(n, -1);
  m.branch_z.assign(n, {0.0, 0.0});
  int branch_count = 0;
  for (const auto& br : j.at("branches")) {
    int from = m.bus(br.at("from").get<std::string>());
    int to = m.bus(br.at("to").get<std::string>());
    if (to == 0 || m.parent[to] != -1 || from == to) {
      throw TopologyError(TopologyError::Code::CyclicTopology,
                          "branch into " + m.bus_names[to] +
                              " closes a loop or re-enters the slack");
    }
    m.parent[to] = from;
    m.branch_z[to] = {br.at("r_ohm").get<double>(), br.at("x_ohm").get<double>()};
    ++branch_count;
  }
  if (branch_count != n - 1) {
    throw TopologyError(TopologyError::Code::CyclicTopology,
                        "branch count does not form a spanning tree");
  }

  // Parents-first order; a parent chain that never reaches the slack means
  // the "tree" contains a cycle.
  m.order.clear();
  std::vector<int> depth(n, -1);
  depth[0] = 0;
  for (int i = 1; i < n; ++i) {
    int steps = 0;
    int b = i;
    while (b != 0) {
      b = m.parent[b];
      if (b < 0 || ++steps > n) {
        throw TopologyError(TopologyError::Code::CyclicTopology,
                            "bus " + m.bus_names[i] + " is not rooted at the slack");
      }
    }
    depth[i] = steps;
  }
  for (int i = 0; i < n; ++i) m.order.push_back(i);
  std::sort(m.order.begin(), m.order.end(),
            [&](int a, int b) { return depth[a] < depth[b]; });

  if (j.contains("attachments")) {
    for (const auto& [name, bus] : j.at("attachments").items()) {
      m.attachments[name] = m.bus(bus.get<std::string>());
    }
  }
  return m;
}

GridState solve_power_flow(const GridModel& model,
                           const std::vector<Injection>& injections) {
  const int n = static_cast<int>(model.bus_names.size());
  GridState st;
  st.v.assign(n, {model.v_nom, 0.0});

  // Net consumption per bus, in VA.
  std::vector<std::complex<double>> s(n, {0.0, 0.0});
  for (const auto& inj : injections) {
    s.at(inj.bus) += std::complex<double>(inj.p_kw * 1e3, inj.q_kvar * 1e3);
  }

  const double tol_va = kMismatchTolPu * kPowerBaseVa;
  std::vector<std::complex<double>> i_bus(n), i_branch(n);

  for (st.iterations = 1; st.iterations <= kMaxSweepIterations;
       ++st.iterations) {
    // Load currents at present voltages: S = V * conj(I).
    for (int b = 0; b < n; ++b) {
      i_bus[b] = std::conj(s[b] / st.v[b]);
    }
    // Backward sweep: accumulate branch currents from the leaves up.
    std::fill(i_branch.begin(), i_branch.end(), std::complex<double>{0, 0});
    for (auto it = model.order.rbegin(); it != model.order.rend(); ++it) {
      int b = *it;
      i_branch[b] += i_bus[b];
      if (b != 0) i_branch[model.parent[b]] += i_branch[b];
    }
    // Forward sweep: propagate voltage drops from the slack down.
    for (int b : model.order) {
      if (b == 0) continue;
      st.v[b] = st.v[model.parent[b]] - model.branch_z[b] * i_branch[b];
    }
    // Mismatch: power delivered at the new voltages vs the specification.
    st.max_mismatch_va = 0.0;
    for (int b = 1; b < n; ++b) {
      auto delivered = st.v[b] * std::conj(i_bus[b]);
      st.max_mismatch_va =
          std::max(st.max_mismatch_va, std::abs(delivered - s[b]));
    }
    if (st.max_mismatch_va < tol_va) {
      st.converged = true;
      break;
    }
  }
  if (st.iterations > kMaxSweepIterations) st.iterations = kMaxSweepIterations;
  return st;
}

double voltage_rise_pct(double v_mag, double v_nom) {
  return (v_mag - v_nom) / v_nom * 100.0;
}

double voltage_rise_pct(const GridModel& model, const GridState& state,
                        int bus) {
  if (bus < 0 || bus >= static_cast<int>(state.v.size())) {
    throw TopologyError(TopologyError::Code::UnknownBusReference,
                        "voltage_rise: bus out of range");
  }
  return voltage_rise_pct(std::abs(state.v[bus]), model.v_nom);
}

std::complex<double> slack_power_kva(const GridModel& model,
                                     const GridState& state,
                                     const std::vector<Injection>& injections) {
  const int n = static_cast<int>(model.bus_names.size());
  std::vector<std::complex<double>> s(n, {0.0, 0.0});
  for (const auto& inj : injections) {
    s.at(inj.bus) += std::complex<double>(inj.p_kw * 1e3, inj.q_kvar * 1e3);
  }
  std::vector<std::complex<double>> i_bus(n), i_branch(n, {0.0, 0.0});
  for (int b = 0; b < n; ++b) i_bus[b] = std::conj(s[b] / state.v[b]);
  for (auto it = model.order.rbegin(); it != model.order.rend(); ++it) {
    int b = *it;
    i_branch[b] += i_bus[b];
    if (b != 0) i_branch[model.parent[b]] += i_branch[b];
  }
  // Slack supplies the root branch currents plus its own attached load.
  auto s_slack = state.v[0] * std::conj(i_branch[0]);
  return s_slack / 1e3;  // kW + j kVAr
}

}  // namespace medsim::grid
