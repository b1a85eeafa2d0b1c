// SPDX-License-Identifier: Apache-2.0
#include "medsim/controller.hpp"

#include <algorithm>
#include <cmath>

namespace medsim::csc {

Mode hysteresis_step(const HysteresisBand& band, Mode mode,
                     double deviation_pct) {
  if (band.sense == BandSense::Over) {
    if (mode == Mode::Inactive && deviation_pct > band.activate_pct)
      return Mode::Active;
    if (mode == Mode::Active && deviation_pct < band.deactivate_pct)
      return Mode::Inactive;
  } else {
    if (mode == Mode::Inactive && deviation_pct < band.activate_pct)
      return Mode::Active;
    if (mode == Mode::Active && deviation_pct > band.deactivate_pct)
      return Mode::Inactive;
  }
  return mode;  // deadband: hold
}

HysteresisBand band_for(const ControllerConfig& cfg, ScenarioKind kind) {
  HysteresisBand b;
  b.activate_pct = cfg.activate_pct;
  b.deactivate_pct = cfg.deactivate_pct;
  b.sense =
      kind == ScenarioKind::Overvoltage ? BandSense::Over : BandSense::Under;
  return b;
}

double reactive_support(double deviation_pct, double q_limit_kvar,
                        double gain_kvar_per_pct, double deadband_pct) {
  if (std::abs(deviation_pct) < deadband_pct) return 0.0;
  double q = -gain_kvar_per_pct * deviation_pct;
  return std::clamp(q, -q_limit_kvar, q_limit_kvar);
}

static void apply_droop(const ControllerConfig& cfg, CommandSet& cmd,
                        double dev2, double dev4) {
  if (!cfg.droop_enabled) return;
  cmd.bess_q_support_kvar =
      reactive_support(dev2, cfg.bess_q_limit_kvar, cfg.droop_kvar_per_pct,
                       cfg.droop_deadband_pct);
  cmd.rse_q_support_kvar =
      reactive_support(dev4, cfg.rse_q_limit_kvar, cfg.droop_kvar_per_pct,
                       cfg.droop_deadband_pct);
}

CommandSet step_case1(const ControllerConfig& cfg, ControllerState& st,
                      double rise_pcc2_pct, double rise_pcc4_pct) {
  auto band = band_for(cfg, ScenarioKind::Overvoltage);
  st.pcc2 = hysteresis_step(band, st.pcc2, rise_pcc2_pct);
  st.pcc4 = hysteresis_step(band, st.pcc4, rise_pcc4_pct);

  CommandSet cmd;
  cmd.bess_p_ref_kw =
      st.pcc2 == Mode::Active ? cfg.bess_charge_cmd_kw : 0.0;
  cmd.ehp_on = st.pcc4 == Mode::Active;
  // Extra load is what helps here; the CHP stays off and its thermal
  // setpoint is forced to zero.
  cmd.chp_on = false;
  cmd.chp_p_th_ref_kw = 0.0;
  apply_droop(cfg, cmd, rise_pcc2_pct, rise_pcc4_pct);
  return cmd;
}

CommandSet step_case2(const ControllerConfig& cfg, ControllerState& st,
                      double dev_pcc2_pct, double dev_pcc4_pct) {
  auto band = band_for(cfg, ScenarioKind::Undervoltage);
  st.pcc2 = hysteresis_step(band, st.pcc2, dev_pcc2_pct);
  st.pcc4 = hysteresis_step(band, st.pcc4, dev_pcc4_pct);

  CommandSet cmd;
  if (st.pcc2 == Mode::Active) {
    cmd.bess_p_ref_kw = 0.0;  // stop charging
  } else {
    cmd.bess_p_ref_kw = cfg.case2_precharge_kw;  // pre-event charging
  }
  if (st.pcc4 == Mode::Active) {
    cmd.ehp_on = false;
    cmd.chp_on = true;
    cmd.chp_p_th_ref_kw = cfg.chp_p_th_cmd_kw;
  } else {
    cmd.ehp_on = true;  // the EHP operates until the event
    cmd.chp_on = false;
    cmd.chp_p_th_ref_kw = 0.0;
  }
  apply_droop(cfg, cmd, dev_pcc2_pct, dev_pcc4_pct);
  return cmd;
}

}  // namespace medsim::csc
