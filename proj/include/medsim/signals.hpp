// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace medsim::signals {

enum class SignalKind { Measurement, Setpoint, Status };

// Quality of a stored sample. `Stale` is never stored; it is the effective
// quality reported when a reader applies a freshness horizon.
enum class Quality { Ok, Clamped, Stale };

std::string_view to_string(SignalKind k);
std::string_view to_string(Quality q);
std::optional<SignalKind> kind_from_string(std::string_view s);
std::optional<Quality> quality_from_string(std::string_view s);

// One catalog entry: a namespaced, unit-carrying, range-bounded signal.
struct SignalDescriptor {
  std::string ns;    // owning research-infrastructure namespace (SIN, RSE, ...)
  std::string name;  // symbol within the namespace
  std::string unit;
  double min = 0.0;
  double max = 0.0;
  SignalKind kind = SignalKind::Measurement;
};

struct SignalKey {
  std::string ns;
  std::string name;
  bool operator==(const SignalKey&) const = default;
  bool operator<(const SignalKey& o) const {
    return ns != o.ns ? ns < o.ns : name < o.name;
  }
  std::string str() const { return ns + "." + name; }
};

struct SignalId {
  uint32_t index = 0;
  bool operator==(const SignalId&) const = default;
};

struct SignalSample {
  double value = 0.0;
  int64_t timestamp_ms = 0;  // simulated milliseconds from the scenario epoch
  std::string origin;        // node that produced the value
  Quality quality = Quality::Ok;
};

enum class WriteError { None, UnknownSignal, NonFinite, Superseded };

struct WriteResult {
  WriteError error = WriteError::None;
  SignalSample applied;  // valid only when error == None
  bool ok() const { return error == WriteError::None; }
};

struct RegistryError : std::runtime_error {
  enum class Code { DuplicateSignal, InvalidRange };
  RegistryError(Code c, const std::string& what)
      : std::runtime_error(what), code(c) {}
  Code code;
};

// Latest-value store over a fixed catalog. Writes clamp to the descriptor
// range, reject non-finite values, and apply last-write-wins ordering
// (newer timestamp wins; equal timestamps go to the lexicographically
// smaller origin). Readers may run concurrently with writers; a write is
// visible in full or not at all.
class SignalRegistry {
 public:
  SignalRegistry() = default;
  SignalRegistry(const SignalRegistry& other);
  SignalRegistry& operator=(const SignalRegistry&) = delete;

  SignalId register_signal(const SignalDescriptor& d);

  std::optional<SignalId> find(std::string_view ns, std::string_view name) const;
  std::optional<SignalId> find(const SignalKey& key) const;
  const SignalDescriptor& descriptor(SignalId id) const;
  SignalKey key(SignalId id) const;
  size_t size() const { return catalog_.size(); }
  const std::vector<SignalDescriptor>& catalog() const { return catalog_; }
  std::vector<SignalDescriptor> list(std::string_view ns) const;
  bool has_namespace(std::string_view ns) const;
  std::vector<std::string> namespaces() const;

  WriteResult write(SignalId id, double raw_value, int64_t timestamp_ms,
                    std::string_view origin);
  // Replication path: applies the same last-write-wins ordering but stores
  // the sample verbatim, preserving origin and quality set at the source.
  WriteResult merge(SignalId id, const SignalSample& sample);
  std::optional<SignalSample> read(SignalId id) const;

  // True when the signal was never written or its sample is older than
  // `horizon_ms` relative to `now_ms`.
  bool is_stale(SignalId id, int64_t now_ms, int64_t horizon_ms) const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<SignalDescriptor> catalog_;
  std::unordered_map<std::string, uint32_t> index_;  // "ns/name" -> index
  std::vector<std::optional<SignalSample>> latest_;
};

// Effective quality under a freshness horizon.
Quality effective_quality(const SignalSample& s, int64_t now_ms,
                          int64_t horizon_ms);

// The shipped catalog: the published signal table of the coupled experiment
// (14 exchanged symbols plus the EHP enable and the CRES loop temperature)
// and the four supervisory command channels that close the control loop.
void populate_default_catalog(SignalRegistry& reg);

// Line-oriented catalog file: `namespace,name,unit,min,max,kind` records,
// `#` comments and blank lines ignored.
void load_catalog(std::istream& in, SignalRegistry& reg);
void write_catalog(const SignalRegistry& reg, std::ostream& out);

// Role-named keys into the shipped catalog.
namespace keys {
struct Key {
  std::string_view ns;
  std::string_view name;
  operator SignalKey() const { return SignalKey{std::string(ns), std::string(name)}; }
  SignalKey k() const { return SignalKey{std::string(ns), std::string(name)}; }
};
inline constexpr Key bess_active_power{"SIN", "P_el_SIN"};
inline constexpr Key bess_reactive_power{"SIN", "Q_el_SIN"};
inline constexpr Key bess_active_setpoint{"SIN", "P_el_SIN_ref"};
inline constexpr Key bess_reactive_setpoint{"SIN", "Q_el_SIN_ref"};
inline constexpr Key bess_soc{"SIN", "SoC"};
inline constexpr Key pcc2_voltage{"SIN", "V_SIN_ref"};
inline constexpr Key pcc2_frequency{"SIN", "f_SIN_ref"};
inline constexpr Key rse_active_power{"RSE", "P_el_RSE"};
inline constexpr Key rse_reactive_power{"RSE", "Q_el_RSE"};
inline constexpr Key chp_thermal_power{"RSE", "P_th_CHP"};
inline constexpr Key pcc4_voltage{"RSE", "V_RSE_ref"};
inline constexpr Key pcc4_frequency{"RSE", "f_RSE_ref"};
inline constexpr Key rse_reactive_setpoint{"RSE", "Q_el_RSE_ref"};
inline constexpr Key chp_thermal_setpoint{"RSE", "P_th_CHP_ref"};
inline constexpr Key chp_enable{"RSE", "ON_OFF"};
inline constexpr Key ehp_thermal_power{"CRES", "P_th_CRES"};
inline constexpr Key cres_temperature{"CRES", "T_CRES"};
inline constexpr Key ehp_enable{"CRES", "ON_OFF"};
inline constexpr Key dtu_heat_setpoint{"DTU", "P_bar_DTU"};
inline constexpr Key dtu_temperature{"DTU", "T_DTU"};
}  // namespace keys

}  // namespace medsim::signals

template <>
struct std::hash<medsim::signals::SignalKey> {
  size_t operator()(const medsim::signals::SignalKey& k) const {
    return std::hash<std::string>()(k.ns) * 1315423911u ^
           std::hash<std::string>()(k.name);
  }
};
