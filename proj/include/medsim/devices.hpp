// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace medsim::devices {

// Sign convention across the whole artifact: positive P/Q = consumption at
// the PCC, generation is negative. Reactive *support* commands from the
// droop are injection-positive and get negated onto the wire.

struct BessConfig {
  double e_cap_kwh = 100.0;
  double p_max_kw = 40.0;
  double q_max_kvar = 5.0;
  double initial_soc_pct = 50.0;
};

struct BessState {
  double soc_pct = 50.0;
  double p_applied_kw = 0.0;
  double q_applied_kvar = 0.0;
};

// Applies a power reference for one step: clamps to the +/-40 kW rating and
// additionally limits to what the state of charge can absorb or deliver
// within dt, so the SoC integral matches the applied power exactly. At
// SoC = 100 a charging request collapses to zero (and symmetrically at 0).
// Returns the applied power.
double bess_step(const BessConfig& cfg, BessState& st, double p_ref_kw,
                 double dt_s);

struct ChpConfig {
  double p_th_min_kw = 46.0;
  double p_th_max_kw = 81.0;
  double el_th_ratio = 0.55;
  double q_max_kvar = 50.0;
};

struct ChpState {
  bool on = false;
  double p_th_kw = 0.0;
  double p_el_kw = 0.0;  // consumption-positive, so running CHP is negative
};

void chp_step(const ChpConfig& cfg, ChpState& st, bool on_cmd,
              double p_th_ref_kw);

// Linear range mapping from the CHP plant (46..81 kW) onto the DTU heat
// source (0..22.5 kW), quantized to the 2.5 kW heater steps so both
// endpoints and the full controllable range line up. Zero means "off".
// Nonzero inputs outside the plant band are a caller error.
double map_chp_to_dtu(double p_th_chp_kw);

struct EhpConfig {
  double p_el_kw = 16.0;
  double cop = 1.8;
  double p_th_max_kw = 30.0;
};

struct EhpState {
  bool on = false;
  double p_el_kw = 0.0;
  double p_th_kw = 0.0;
};

void ehp_step(const EhpConfig& cfg, EhpState& st, bool on_cmd);

}  // namespace medsim::devices
