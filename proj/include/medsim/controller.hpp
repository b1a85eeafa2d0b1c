// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

namespace medsim::csc {

enum class Mode { Inactive, Active };
enum class BandSense { Over, Under };
enum class ScenarioKind { Overvoltage, Undervoltage };

// Asymmetric activate/deactivate thresholds. Over-sense bands watch voltage
// rises (activate above, deactivate below); under-sense bands mirror them.
struct HysteresisBand {
  double activate_pct = 5.0;
  double deactivate_pct = 0.0;
  BandSense sense = BandSense::Over;

  bool valid() const {
    return sense == BandSense::Over ? activate_pct > deactivate_pct
                                    : activate_pct < deactivate_pct;
  }
};

// Pure transition function: the next mode depends only on (band, mode,
// deviation). Inside the deadband the mode holds.
Mode hysteresis_step(const HysteresisBand& band, Mode mode,
                     double deviation_pct);

// Full command set issued by the controller each control period.
// bess_p_ref/chp refs are consumption-positive; q refs are injection-
// positive support values (see reactive_support).
struct CommandSet {
  double bess_p_ref_kw = 0.0;
  double bess_q_support_kvar = 0.0;
  bool chp_on = false;
  double chp_p_th_ref_kw = 0.0;
  bool ehp_on = false;
  double rse_q_support_kvar = 0.0;
};

struct ControllerConfig {
  double activate_pct = 5.0;    // sign carries the sense (+over / -under)
  double deactivate_pct = 0.0;
  double bess_charge_cmd_kw = 40.0;   // full-range charging on activation
  double chp_p_th_cmd_kw = 81.0;      // full-range thermal on activation
  double case2_precharge_kw = 20.0;   // pre-event BESS charging (Case 2)
  bool droop_enabled = true;
  double droop_kvar_per_pct = 2.0;
  double droop_deadband_pct = 0.5;
  double bess_q_limit_kvar = 5.0;
  double rse_q_limit_kvar = 50.0;
};

// Per-scenario controller state: one hysteresis machine per controlled PCC.
struct ControllerState {
  Mode pcc2 = Mode::Inactive;  // drives the BESS
  Mode pcc4 = Mode::Inactive;  // drives EHP (Case 1) or EHP+CHP (Case 2)
};

// Case 1, overvoltage: activation turns the flexible loads on (BESS charges
// at full range, EHP runs); the CHP stays off and its thermal setpoint is
// forced to zero since extra generation cannot help.
CommandSet step_case1(const ControllerConfig& cfg, ControllerState& st,
                      double rise_pcc2_pct, double rise_pcc4_pct);

// Case 2, undervoltage: activation sheds the EHP load, brings the CHP up at
// full thermal range, and stops BESS charging; deactivation restores the
// pre-event commands (EHP on, BESS pre-charging).
CommandSet step_case2(const ControllerConfig& cfg, ControllerState& st,
                      double dev_pcc2_pct, double dev_pcc4_pct);

// Proportional reactive support: Q = clamp(-gain * deviation, +/-limit),
// zero inside the deadband. The result is injection-positive (a positive
// value raises the voltage); it is negated when written to the
// consumption-positive wire.
double reactive_support(double deviation_pct, double q_limit_kvar,
                        double gain_kvar_per_pct, double deadband_pct);

// Band for a scenario kind from the configured thresholds.
HysteresisBand band_for(const ControllerConfig& cfg, ScenarioKind kind);

}  // namespace medsim::csc
