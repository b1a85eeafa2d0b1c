// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "medsim/rng.hpp"
#include "medsim/signals.hpp"

using namespace medsim;
using namespace medsim::signals;

namespace {

SignalRegistry catalog() {
  SignalRegistry reg;
  populate_default_catalog(reg);
  return reg;
}

}  // namespace

TEST_CASE("register accepts new descriptors and hands out stable ids") {
  SignalRegistry reg;
  auto id = reg.register_signal({"SIN", "P_el_SIN", "kW", -40, 40,
                                 SignalKind::Measurement});
  CHECK(reg.descriptor(id).unit == "kW");
  CHECK(reg.find("SIN", "P_el_SIN").has_value());
  CHECK(*reg.find("SIN", "P_el_SIN") == id);
}

TEST_CASE("register rejects duplicates and degenerate ranges") {
  SignalRegistry reg;
  reg.register_signal({"SIN", "SoC", "%", 0, 100, SignalKind::Measurement});
  CHECK_THROWS_AS(reg.register_signal(
                      {"SIN", "SoC", "%", 0, 100, SignalKind::Measurement}),
                  RegistryError);
  CHECK_THROWS_AS(
      reg.register_signal({"X", "flat", "-", 0, 0, SignalKind::Status}),
      RegistryError);
  CHECK_THROWS_AS(
      reg.register_signal({"X", "inverted", "-", 2, 1, SignalKind::Status}),
      RegistryError);
}

TEST_CASE("writes clamp to the descriptor range and flag it") {
  auto reg = catalog();
  auto p = *reg.find("SIN", "P_el_SIN");
  auto r = reg.write(p, 50.0, 1, "SIN");
  REQUIRE(r.ok());
  CHECK(r.applied.value == 40.0);
  CHECK(r.applied.quality == Quality::Clamped);

  auto soc = *reg.find("SIN", "SoC");
  r = reg.write(soc, 50.0, 1, "SIN");
  REQUIRE(r.ok());
  CHECK(r.applied.value == 50.0);
  CHECK(r.applied.quality == Quality::Ok);

  auto f = *reg.find("SIN", "f_SIN_ref");
  r = reg.write(f, 47.0, 1, "TUD");
  REQUIRE(r.ok());
  CHECK(r.applied.value == 48.0);
  CHECK(r.applied.quality == Quality::Clamped);
}

TEST_CASE("non-finite values are rejected, not clamped") {
  auto reg = catalog();
  auto p = *reg.find("SIN", "P_el_SIN");
  CHECK(reg.write(p, std::nan(""), 1, "SIN").error == WriteError::NonFinite);
  CHECK(reg.write(p, INFINITY, 1, "SIN").error == WriteError::NonFinite);
  CHECK(!reg.read(p).has_value());
}

TEST_CASE("reads return the latest accepted sample") {
  auto reg = catalog();
  auto p = *reg.find("SIN", "P_el_SIN");
  CHECK(!reg.read(p).has_value());  // never written

  REQUIRE(reg.write(p, 10.0, 5, "SIN").ok());
  auto s = reg.read(p);
  REQUIRE(s.has_value());
  CHECK(s->value == 10.0);
  CHECK(s->timestamp_ms == 5);

  // Older timestamp: rejected, no mutation.
  CHECK(reg.write(p, 99.0, 3, "SIN").error == WriteError::Superseded);
  CHECK(reg.read(p)->value == 10.0);
  CHECK(reg.read(p)->timestamp_ms == 5);
}

TEST_CASE("timestamp ties go to the lexicographically smaller origin") {
  auto reg = catalog();
  auto p = *reg.find("SIN", "P_el_SIN");
  REQUIRE(reg.write(p, 1.0, 7, "B").ok());
  CHECK(reg.write(p, 2.0, 7, "A").ok());  // A < B wins
  CHECK(reg.read(p)->value == 2.0);
  CHECK(reg.write(p, 3.0, 7, "B").error == WriteError::Superseded);
  CHECK(reg.write(p, 3.0, 7, "A").error == WriteError::Superseded);  // same
}

TEST_CASE("staleness horizon") {
  auto reg = catalog();
  auto p = *reg.find("SIN", "P_el_SIN");
  CHECK(reg.is_stale(p, 0, 2000));  // never written
  reg.write(p, 1.0, 1000, "SIN");
  CHECK(!reg.is_stale(p, 1000, 2000));
  CHECK(!reg.is_stale(p, 3000, 2000));
  CHECK(reg.is_stale(p, 6000, 2000));  // last write 5 s ago, horizon 2 s
}

TEST_CASE("property: accepted writes always land inside the range") {
  auto reg = catalog();
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    auto idx = static_cast<uint32_t>(rng.uniform_int(0, reg.size() - 1));
    SignalId id{idx};
    const auto& d = reg.descriptor(id);
    double raw = rng.uniform(-500.0, 500.0);
    auto r = reg.write(id, raw, i, "fuzz");
    REQUIRE(r.ok());
    CHECK(r.applied.value >= d.min);
    CHECK(r.applied.value <= d.max);
    bool outside = raw < d.min || raw > d.max;
    CHECK((r.applied.quality == Quality::Clamped) == outside);
  }
}

TEST_CASE("property: rewriting the stored value only advances the timestamp") {
  auto reg = catalog();
  auto p = *reg.find("RSE", "P_el_RSE");
  reg.write(p, 33.5, 10, "RSE");
  auto before = *reg.read(p);
  reg.write(p, before.value, 20, "RSE");
  auto after = *reg.read(p);
  CHECK(after.value == before.value);
  CHECK(after.quality == before.quality);
  CHECK(after.timestamp_ms == 20);
}

TEST_CASE("property: stored timestamps are non-decreasing under any order") {
  auto reg = catalog();
  auto p = *reg.find("DTU", "T_DTU");
  Rng rng(7);
  int64_t last_ts = -1;
  for (int i = 0; i < 500; ++i) {
    int64_t ts = rng.uniform_int(0, 100);
    reg.write(p, rng.uniform(0, 100), ts, "DTU");
    auto s = reg.read(p);
    REQUIRE(s.has_value());
    CHECK(s->timestamp_ms >= last_ts);
    last_ts = s->timestamp_ms;
  }
}

TEST_CASE("shipped catalog carries the published table exactly") {
  auto reg = catalog();
  struct Row {
    const char *ns, *name, *unit;
    double min, max;
  };
  // The fourteen exchanged symbols with their operational ranges, plus the
  // EHP enable and the CRES loop temperature.
  const Row core[] = {
      {"SIN", "P_el_SIN", "kW", -40, 40},
      {"SIN", "Q_el_SIN", "kVAr", -5, 5},
      {"RSE", "P_th_CHP", "kW", 46, 81},
      {"SIN", "P_el_SIN_ref", "kW", -40, 40},
      {"DTU", "P_bar_DTU", "kW", 0, 25},
      {"SIN", "SoC", "%", 0, 100},
      {"SIN", "V_SIN_ref", "V", 150, 400},
      {"SIN", "f_SIN_ref", "Hz", 48, 52},
      {"RSE", "P_el_RSE", "kW", -100, 100},
      {"RSE", "Q_el_RSE", "kVAr", -50, 50},
      {"RSE", "V_RSE_ref", "V", 150, 400},
      {"RSE", "f_RSE_ref", "Hz", 48, 52},
      {"CRES", "P_th_CRES", "kW", 0, 30},
      {"DTU", "T_DTU", "degC", 0, 100},
      {"CRES", "ON_OFF", "-", 0, 1},
      {"CRES", "T_CRES", "degC", 0, 100},
  };
  for (const auto& row : core) {
    auto id = reg.find(row.ns, row.name);
    REQUIRE_MESSAGE(id.has_value(), row.ns << "/" << row.name);
    const auto& d = reg.descriptor(*id);
    CHECK(d.unit == row.unit);
    CHECK(d.min == row.min);
    CHECK(d.max == row.max);
  }
  // The only additions are the supervisory command channels.
  const std::set<std::string> extensions = {
      "SIN/Q_el_SIN_ref", "RSE/Q_el_RSE_ref", "RSE/P_th_CHP_ref", "RSE/ON_OFF"};
  std::set<std::string> seen;
  for (const auto& d : reg.catalog()) seen.insert(d.ns + "/" + d.name);
  CHECK(reg.size() == 16 + extensions.size());
  for (const auto& e : extensions) CHECK(seen.count(e) == 1);
}

TEST_CASE("catalog file round trip matches the built-in table") {
  auto reg = catalog();
  std::stringstream file;
  write_catalog(reg, file);

  SignalRegistry parsed;
  load_catalog(file, parsed);
  REQUIRE(parsed.size() == reg.size());
  for (uint32_t i = 0; i < reg.size(); ++i) {
    const auto& a = reg.descriptor({i});
    const auto& b = parsed.descriptor({i});
    CHECK(a.ns == b.ns);
    CHECK(a.name == b.name);
    CHECK(a.unit == b.unit);
    CHECK(a.min == b.min);
    CHECK(a.max == b.max);
    CHECK(a.kind == b.kind);
  }
}

TEST_CASE("shipped catalog file matches the built-in table") {
  std::ifstream file(std::string(MEDSIM_SOURCE_DIR) + "/config/catalog.csv");
  REQUIRE_MESSAGE(file.good(), "config/catalog.csv missing");
  SignalRegistry parsed;
  load_catalog(file, parsed);
  auto reg = catalog();
  REQUIRE(parsed.size() == reg.size());
  for (uint32_t i = 0; i < reg.size(); ++i) {
    const auto& a = reg.descriptor({i});
    const auto& b = parsed.descriptor({i});
    CHECK(a.ns == b.ns);
    CHECK(a.name == b.name);
    CHECK(a.min == b.min);
    CHECK(a.max == b.max);
  }
}
