// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "medsim/record.hpp"
#include "medsim/scenario.hpp"

namespace medsim::harness {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
  RunRecord record;
  RunMetrics metrics;
};

// Runs one scenario to completion on the simulated clock. Deterministic for
// a given config and seed in in-process mode; in multi-process mode the
// node emulators live behind the configured REST endpoints and progress is
// coordinated by tick-numbered replication cycles. `realtime` paces the
// loop at wall-clock dt for demonstrations.
RunResult run_scenario(const ScenarioConfig& cfg, bool realtime = false);

// Hosts one research infrastructure (or the cloud store, namespace "CLOUD")
// behind the REST interface, participating in replication with the cloud
// node. Blocks until /admin/shutdown; returns a process exit code.
int serve_node(const std::string& ns, const ScenarioConfig& cfg,
               const std::string& host, int port);

}  // namespace medsim::harness
