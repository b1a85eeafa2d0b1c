// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "medsim/signals.hpp"

namespace medsim::harness {

// Per-tick log of every cataloged signal: value plus quality. Column order
// follows the catalog; CSV emit/parse round trips byte-exactly.
struct RunRecord {
  struct Cell {
    bool written = false;
    double value = 0.0;
    signals::Quality quality = signals::Quality::Ok;
  };
  struct Row {
    int64_t time_ms = 0;
    std::vector<Cell> cells;
  };

  std::vector<std::string> columns;  // "NS.name", catalog order
  std::vector<Row> rows;

  std::optional<size_t> column(const std::string& name) const;
};

void write_record_csv(const RunRecord& rec, std::ostream& out);
RunRecord read_record_csv(std::istream& in);

// Ordered key/value report. Values are stored pre-formatted so that files
// survive emit/parse cycles unchanged.
struct RunMetrics {
  std::vector<std::pair<std::string, std::string>> kv;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, int64_t value);
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
};

void write_metrics(const RunMetrics& m, std::ostream& out);

// Everything derivable from the record alone: per-PCC voltage deviation
// extremes (split at the first observable actuation), command toggle
// counts, recovery time, SoC drift and delivered heat. Replication lag is
// harness-side knowledge and is appended by the runner, not here.
RunMetrics compute_metrics(const RunRecord& rec, double v_nom = 240.0);

}  // namespace medsim::harness
