// SPDX-License-Identifier: Apache-2.0
#include "medsim/devices.hpp"

#include <algorithm>
#include <cmath>

#include "medsim/thermal.hpp"

namespace medsim::devices {

double bess_step(const BessConfig& cfg, BessState& st, double p_ref_kw,
                 double dt_s) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("dt must be > 0");
  double applied = std::clamp(p_ref_kw, -cfg.p_max_kw, cfg.p_max_kw);

  // SoC moves by applied * dt / capacity (percent). Limit the power so the
  // step lands exactly on the 0/100 bound instead of overshooting; this
  // keeps SoC and the applied-power integral consistent and makes a full
  // (or empty) battery absorb (or deliver) nothing.
  double pct_per_kw = dt_s / 3600.0 / cfg.e_cap_kwh * 100.0;
  double max_charge = (100.0 - st.soc_pct) / pct_per_kw;
  double max_discharge = (0.0 - st.soc_pct) / pct_per_kw;
  applied = std::clamp(applied, max_discharge, max_charge);

  st.soc_pct += applied * pct_per_kw;
  st.soc_pct = std::clamp(st.soc_pct, 0.0, 100.0);
  st.p_applied_kw = applied;
  return applied;
}

void chp_step(const ChpConfig& cfg, ChpState& st, bool on_cmd,
              double p_th_ref_kw) {
  if (!on_cmd) {
    st = ChpState{};
    return;
  }
  st.on = true;
  st.p_th_kw = std::clamp(p_th_ref_kw, cfg.p_th_min_kw, cfg.p_th_max_kw);
  st.p_el_kw = -cfg.el_th_ratio * st.p_th_kw;  // generation
}

double map_chp_to_dtu(double p_th_chp_kw) {
  if (p_th_chp_kw == 0.0) return 0.0;
  if (p_th_chp_kw < 46.0 || p_th_chp_kw > 81.0) {
    throw std::domain_error("CHP thermal power outside 46..81 kW");
  }
  double scaled = (p_th_chp_kw - 46.0) / 35.0 * 22.5;
  return thermal::quantize_heater_kw(scaled);
}

void ehp_step(const EhpConfig& cfg, EhpState& st, bool on_cmd) {
  if (!on_cmd) {
    st = EhpState{};
    return;
  }
  st.on = true;
  st.p_el_kw = cfg.p_el_kw;
  st.p_th_kw = std::min(cfg.cop * cfg.p_el_kw, cfg.p_th_max_kw);
}

}  // namespace medsim::devices
