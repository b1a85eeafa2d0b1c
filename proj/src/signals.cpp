// SPDX-License-Identifier: Apache-2.0
#include "medsim/signals.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "medsim/util.hpp"

namespace medsim::signals {

std::string_view to_string(SignalKind k) {
  switch (k) {
    case SignalKind::Measurement: return "measurement";
    case SignalKind::Setpoint: return "setpoint";
    case SignalKind::Status: return "status";
  }
  return "measurement";
}

std::string_view to_string(Quality q) {
  switch (q) {
    case Quality::Ok: return "ok";
    case Quality::Clamped: return "clamped";
    case Quality::Stale: return "stale";
  }
  return "ok";
}

std::optional<SignalKind> kind_from_string(std::string_view s) {
  if (s == "measurement") return SignalKind::Measurement;
  if (s == "setpoint") return SignalKind::Setpoint;
  if (s == "status") return SignalKind::Status;
  return std::nullopt;
}

std::optional<Quality> quality_from_string(std::string_view s) {
  if (s == "ok") return Quality::Ok;
  if (s == "clamped") return Quality::Clamped;
  if (s == "stale") return Quality::Stale;
  return std::nullopt;
}

SignalRegistry::SignalRegistry(const SignalRegistry& other) {
  std::shared_lock lock(other.mutex_);
  catalog_ = other.catalog_;
  index_ = other.index_;
  latest_ = other.latest_;
}

static std::string index_key(std::string_view ns, std::string_view name) {
  std::string k;
  k.reserve(ns.size() + name.size() + 1);
  k.append(ns);
  k.push_back('/');
  k.append(name);
  return k;
}

SignalId SignalRegistry::register_signal(const SignalDescriptor& d) {
  std::unique_lock lock(mutex_);
  if (!(d.min < d.max)) {
    throw RegistryError(RegistryError::Code::InvalidRange,
                        "invalid range for " + d.ns + "/" + d.name);
  }
  auto key = index_key(d.ns, d.name);
  if (index_.count(key)) {
    throw RegistryError(RegistryError::Code::DuplicateSignal,
                        "duplicate signal " + d.ns + "/" + d.name);
  }
  uint32_t idx = static_cast<uint32_t>(catalog_.size());
  catalog_.push_back(d);
  latest_.emplace_back(std::nullopt);
  index_.emplace(std::move(key), idx);
  return SignalId{idx};
}

std::optional<SignalId> SignalRegistry::find(std::string_view ns,
                                             std::string_view name) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(index_key(ns, name));
  if (it == index_.end()) return std::nullopt;
  return SignalId{it->second};
}

std::optional<SignalId> SignalRegistry::find(const SignalKey& key) const {
  return find(key.ns, key.name);
}

const SignalDescriptor& SignalRegistry::descriptor(SignalId id) const {
  return catalog_.at(id.index);
}

SignalKey SignalRegistry::key(SignalId id) const {
  const auto& d = catalog_.at(id.index);
  return SignalKey{d.ns, d.name};
}

std::vector<SignalDescriptor> SignalRegistry::list(std::string_view ns) const {
  std::shared_lock lock(mutex_);
  std::vector<SignalDescriptor> out;
  for (const auto& d : catalog_) {
    if (d.ns == ns) out.push_back(d);
  }
  return out;
}

bool SignalRegistry::has_namespace(std::string_view ns) const {
  std::shared_lock lock(mutex_);
  return std::any_of(catalog_.begin(), catalog_.end(),
                     [&](const SignalDescriptor& d) { return d.ns == ns; });
}

std::vector<std::string> SignalRegistry::namespaces() const {
  std::shared_lock lock(mutex_);
  std::set<std::string> seen;
  for (const auto& d : catalog_) seen.insert(d.ns);
  return {seen.begin(), seen.end()};
}

WriteResult SignalRegistry::write(SignalId id, double raw_value,
                                  int64_t timestamp_ms,
                                  std::string_view origin) {
  std::unique_lock lock(mutex_);
  if (id.index >= catalog_.size()) {
    return {WriteError::UnknownSignal, {}};
  }
  if (!std::isfinite(raw_value)) {
    // Non-finite values indicate an emulator bug, not actuator saturation:
    // reject instead of clamping.
    return {WriteError::NonFinite, {}};
  }
  auto& slot = latest_[id.index];
  if (slot) {
    // Last-write-wins: never move a key backwards in time; on a timestamp
    // tie the lexicographically smaller origin wins, which keeps merges
    // order-independent across replicas.
    if (timestamp_ms < slot->timestamp_ms) return {WriteError::Superseded, {}};
    if (timestamp_ms == slot->timestamp_ms &&
        !(origin < std::string_view(slot->origin))) {
      return {WriteError::Superseded, {}};
    }
  }
  const auto& d = catalog_[id.index];
  SignalSample s;
  s.value = std::clamp(raw_value, d.min, d.max);
  s.timestamp_ms = timestamp_ms;
  s.origin = std::string(origin);
  s.quality = (raw_value < d.min || raw_value > d.max) ? Quality::Clamped
                                                       : Quality::Ok;
  slot = s;
  return {WriteError::None, s};
}

WriteResult SignalRegistry::merge(SignalId id, const SignalSample& sample) {
  std::unique_lock lock(mutex_);
  if (id.index >= catalog_.size()) {
    return {WriteError::UnknownSignal, {}};
  }
  if (!std::isfinite(sample.value)) {
    return {WriteError::NonFinite, {}};
  }
  auto& slot = latest_[id.index];
  if (slot) {
    if (sample.timestamp_ms < slot->timestamp_ms)
      return {WriteError::Superseded, {}};
    if (sample.timestamp_ms == slot->timestamp_ms &&
        !(sample.origin < slot->origin)) {
      return {WriteError::Superseded, {}};
    }
  }
  const auto& d = catalog_[id.index];
  SignalSample s = sample;
  s.value = std::clamp(s.value, d.min, d.max);
  slot = s;
  return {WriteError::None, s};
}

std::optional<SignalSample> SignalRegistry::read(SignalId id) const {
  std::shared_lock lock(mutex_);
  if (id.index >= latest_.size()) return std::nullopt;
  return latest_[id.index];
}

bool SignalRegistry::is_stale(SignalId id, int64_t now_ms,
                              int64_t horizon_ms) const {
  std::shared_lock lock(mutex_);
  if (id.index >= latest_.size() || !latest_[id.index]) return true;
  return now_ms - latest_[id.index]->timestamp_ms > horizon_ms;
}

Quality effective_quality(const SignalSample& s, int64_t now_ms,
                          int64_t horizon_ms) {
  if (now_ms - s.timestamp_ms > horizon_ms) return Quality::Stale;
  return s.quality;
}

void populate_default_catalog(SignalRegistry& reg) {
  using K = SignalKind;
  const struct {
    const char *ns, *name, *unit;
    double min, max;
    SignalKind kind;
  } entries[] = {
      // Exchanged signal table, as published for the coupled experiment.
      {"SIN", "P_el_SIN", "kW", -40, 40, K::Measurement},
      {"SIN", "Q_el_SIN", "kVAr", -5, 5, K::Measurement},
      {"SIN", "P_el_SIN_ref", "kW", -40, 40, K::Setpoint},
      {"SIN", "SoC", "%", 0, 100, K::Measurement},
      {"SIN", "V_SIN_ref", "V", 150, 400, K::Measurement},
      {"SIN", "f_SIN_ref", "Hz", 48, 52, K::Measurement},
      {"RSE", "P_el_RSE", "kW", -100, 100, K::Measurement},
      {"RSE", "Q_el_RSE", "kVAr", -50, 50, K::Measurement},
      {"RSE", "P_th_CHP", "kW", 46, 81, K::Measurement},
      {"RSE", "V_RSE_ref", "V", 150, 400, K::Measurement},
      {"RSE", "f_RSE_ref", "Hz", 48, 52, K::Measurement},
      {"DTU", "P_bar_DTU", "kW", 0, 25, K::Setpoint},
      {"DTU", "T_DTU", "degC", 0, 100, K::Measurement},
      {"CRES", "P_th_CRES", "kW", 0, 30, K::Measurement},
      {"CRES", "ON_OFF", "-", 0, 1, K::Setpoint},
      {"CRES", "T_CRES", "degC", 0, 100, K::Measurement},
      // Supervisory command channels. These carry the controller outputs
      // (reactive setpoints, CHP enable and thermal reference) that the
      // published table does not list explicitly; the CHP reference uses 0
      // for "idle", its operational band is enforced by the plant itself.
      {"SIN", "Q_el_SIN_ref", "kVAr", -5, 5, K::Setpoint},
      {"RSE", "Q_el_RSE_ref", "kVAr", -50, 50, K::Setpoint},
      {"RSE", "P_th_CHP_ref", "kW", 0, 81, K::Setpoint},
      {"RSE", "ON_OFF", "-", 0, 1, K::Setpoint},
  };
  for (const auto& e : entries) {
    reg.register_signal({e.ns, e.name, e.unit, e.min, e.max, e.kind});
  }
}

void load_catalog(std::istream& in, SignalRegistry& reg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6) {
      throw std::runtime_error("catalog line " + std::to_string(lineno) +
                               ": expected 6 fields");
    }
    auto minv = parse_double(fields[3]);
    auto maxv = parse_double(fields[4]);
    auto kind = kind_from_string(fields[5]);
    if (!minv || !maxv || !kind) {
      throw std::runtime_error("catalog line " + std::to_string(lineno) +
                               ": bad value");
    }
    reg.register_signal({fields[0], fields[1], fields[2], *minv, *maxv, *kind});
  }
}

void write_catalog(const SignalRegistry& reg, std::ostream& out) {
  out << "# namespace,name,unit,min,max,kind\n";
  for (const auto& d : reg.catalog()) {
    out << d.ns << ',' << d.name << ',' << d.unit << ',' << format_double(d.min)
        << ',' << format_double(d.max) << ',' << to_string(d.kind) << '\n';
  }
}

}  // namespace medsim::signals
