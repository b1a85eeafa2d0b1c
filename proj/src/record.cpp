// SPDX-License-Identifier: Apache-2.0
#include "medsim/record.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "medsim/util.hpp"

namespace medsim::harness {

std::optional<size_t> RunRecord::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return std::nullopt;
  return static_cast<size_t>(it - columns.begin());
}

void write_record_csv(const RunRecord& rec, std::ostream& out) {
  out << "time_ms";
  for (const auto& c : rec.columns) out << ',' << c << ',' << c << ".q";
  out << '\n';
  for (const auto& row : rec.rows) {
    out << row.time_ms;
    for (const auto& cell : row.cells) {
      if (cell.written) {
        out << ',' << format_double(cell.value) << ','
            << signals::to_string(cell.quality);
      } else {
        out << ",,nodata";
      }
    }
    out << '\n';
  }
}

RunRecord read_record_csv(std::istream& in) {
  RunRecord rec;
  std::string line;
  if (!std::getline(in, line)) return rec;

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  if (header.empty() || header[0] != "time_ms") {
    throw std::runtime_error("record: missing time_ms column");
  }
  for (size_t i = 1; i + 1 < header.size(); i += 2) {
    if (header[i + 1] != header[i] + ".q") {
      throw std::runtime_error("record: expected quality column after " +
                               header[i]);
    }
    rec.columns.push_back(header[i]);
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    // A trailing empty field is dropped by getline; restore it.
    while (fields.size() < 1 + 2 * rec.columns.size()) fields.push_back("");
    RunRecord::Row row;
    auto t = parse_int64(fields[0]);
    if (!t) throw std::runtime_error("record: bad timestamp " + fields[0]);
    row.time_ms = *t;
    for (size_t c = 0; c < rec.columns.size(); ++c) {
      const auto& vs = fields[1 + 2 * c];
      const auto& qs = fields[2 + 2 * c];
      RunRecord::Cell cell;
      if (qs == "nodata" || vs.empty()) {
        cell.written = false;
      } else {
        auto v = parse_double(vs);
        auto q = signals::quality_from_string(qs);
        if (!v || !q) {
          throw std::runtime_error("record: bad cell " + vs + "/" + qs);
        }
        cell.written = true;
        cell.value = *v;
        cell.quality = *q;
      }
      row.cells.push_back(cell);
    }
    rec.rows.push_back(std::move(row));
  }
  return rec;
}

void RunMetrics::add(const std::string& key, const std::string& value) {
  kv.emplace_back(key, value);
}
void RunMetrics::add(const std::string& key, double value) {
  kv.emplace_back(key, format_double(value));
}
void RunMetrics::add(const std::string& key, int64_t value) {
  kv.emplace_back(key, std::to_string(value));
}

std::optional<std::string> RunMetrics::get(const std::string& key) const {
  for (const auto& [k, v] : kv) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::optional<double> RunMetrics::get_number(const std::string& key) const {
  auto s = get(key);
  if (!s) return std::nullopt;
  return parse_double(*s);
}

void write_metrics(const RunMetrics& m, std::ostream& out) {
  for (const auto& [k, v] : m.kv) out << k << '=' << v << '\n';
}

namespace {

struct Series {
  std::vector<double> v;
  bool ok = false;
};

Series extract(const RunRecord& rec, const std::string& col) {
  Series s;
  auto idx = rec.column(col);
  if (!idx) return s;
  s.ok = true;
  s.v.reserve(rec.rows.size());
  for (const auto& row : rec.rows) {
    const auto& cell = row.cells[*idx];
    s.v.push_back(cell.written ? cell.value : 0.0);
  }
  return s;
}

int count_changes(const std::vector<double>& v) {
  int n = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] != v[i - 1]) ++n;
  }
  return n;
}

size_t first_change(const std::vector<double>& v) {
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] != v[0]) return i;
  }
  return v.size();
}

}  // namespace

RunMetrics compute_metrics(const RunRecord& rec, double v_nom) {
  RunMetrics m;
  m.add("rows", static_cast<int64_t>(rec.rows.size()));
  if (rec.rows.empty()) return m;

  const size_t n = rec.rows.size();
  auto v2 = extract(rec, "SIN.V_SIN_ref");
  auto v4 = extract(rec, "RSE.V_RSE_ref");
  auto bess_p = extract(rec, "SIN.P_el_SIN");
  auto ehp_th = extract(rec, "CRES.P_th_CRES");
  auto chp_th = extract(rec, "RSE.P_th_CHP");
  auto bess_ref = extract(rec, "SIN.P_el_SIN_ref");
  auto ehp_cmd = extract(rec, "CRES.ON_OFF");
  auto chp_cmd = extract(rec, "RSE.ON_OFF");
  auto soc = extract(rec, "SIN.SoC");
  auto pbar = extract(rec, "DTU.P_bar_DTU");

  // First commanded change and first tick it shows up in an applied device
  // power: deviations before that point are "pre-activation".
  size_t t_cmd = n;
  for (const auto* s : {&bess_ref, &ehp_cmd, &chp_cmd}) {
    if (s->ok) t_cmd = std::min(t_cmd, first_change(s->v));
  }
  size_t t_eff = n;
  for (const auto* s : {&bess_p, &ehp_th, &chp_th}) {
    if (s->ok) t_eff = std::min(t_eff, first_change(s->v));
  }
  int64_t dt_ms = n > 1 ? rec.rows[1].time_ms - rec.rows[0].time_ms : 0;
  m.add("first_command_change_s",
        t_cmd < n ? rec.rows[t_cmd].time_ms / 1000.0 : -1.0);
  m.add("first_actuation_s",
        t_eff < n ? rec.rows[t_eff].time_ms / 1000.0 : -1.0);

  auto dev_stats = [&](const Series& s, const std::string& prefix) {
    if (!s.ok) return;
    double max_dev = -1e9, min_dev = 1e9;
    double pre_max = -1e9, post_max = -1e9;
    double pre_min = 1e9, post_min = 1e9;
    for (size_t i = 0; i < n; ++i) {
      double dev = (s.v[i] - v_nom) / v_nom * 100.0;
      max_dev = std::max(max_dev, dev);
      min_dev = std::min(min_dev, dev);
      if (i < t_eff) {
        pre_max = std::max(pre_max, dev);
        pre_min = std::min(pre_min, dev);
      } else {
        post_max = std::max(post_max, dev);
        post_min = std::min(post_min, dev);
      }
    }
    m.add(prefix + "_max_rise_pct", max_dev);
    m.add(prefix + "_min_rise_pct", min_dev);
    if (t_eff > 0 && t_eff < n) {
      m.add(prefix + "_pre_activation_max_rise_pct", pre_max);
      m.add(prefix + "_post_activation_max_rise_pct", post_max);
      m.add(prefix + "_pre_activation_min_rise_pct", pre_min);
      m.add(prefix + "_post_activation_min_rise_pct", post_min);
    }
    // Recovery: first tick at/after the command with the deviation inside
    // the +/-1 % band.
    if (t_cmd < n) {
      double recovery = -1.0;
      for (size_t i = t_cmd; i < n; ++i) {
        double dev = (s.v[i] - v_nom) / v_nom * 100.0;
        if (std::abs(dev) < 1.0) {
          recovery = (rec.rows[i].time_ms - rec.rows[t_cmd].time_ms) / 1000.0;
          break;
        }
      }
      m.add(prefix + "_recovery_s", recovery);
    }
  };
  dev_stats(v2, "pcc2");
  dev_stats(v4, "pcc4");

  if (bess_ref.ok) m.add("bess_toggle_count", int64_t{count_changes(bess_ref.v)});
  if (ehp_cmd.ok) m.add("ehp_toggle_count", int64_t{count_changes(ehp_cmd.v)});
  if (chp_cmd.ok) m.add("chp_toggle_count", int64_t{count_changes(chp_cmd.v)});
  if (bess_ref.ok) {
    m.add("bess_cmd_max_kw", *std::max_element(bess_ref.v.begin(), bess_ref.v.end()));
    m.add("bess_cmd_min_kw", *std::min_element(bess_ref.v.begin(), bess_ref.v.end()));
  }
  if (ehp_cmd.ok) {
    m.add("ehp_on_ticks", int64_t{std::count(ehp_cmd.v.begin(), ehp_cmd.v.end(), 1.0)});
  }
  if (soc.ok) m.add("soc_delta_pct", soc.v.back() - soc.v.front());
  if (pbar.ok && dt_ms > 0) {
    double kwh = 0.0;
    for (double p : pbar.v) kwh += p * (dt_ms / 1000.0) / 3600.0;
    m.add("dtu_heat_energy_kwh", kwh);
    m.add("dtu_heat_max_kw", *std::max_element(pbar.v.begin(), pbar.v.end()));
  }
  return m;
}

}  // namespace medsim::harness
