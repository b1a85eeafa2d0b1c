// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <stdexcept>

namespace medsim::thermal {

inline constexpr double kWaterCp = 4186.0;      // J/(kg K)
inline constexpr double kWaterRho = 1000.0;     // kg/m^3

// Discrete electrical flow-heater bank: nine 2.5 kW units. Requests snap to
// the nearest reachable step, half-steps round up.
struct HeaterBank {
  static constexpr int kUnits = 9;
  static constexpr double kUnitKw = 2.5;

  int active_count = 0;

  // Returns the applied power (active_count * 2.5 kW).
  double set_power(double requested_kw);
  double output_kw() const { return active_count * kUnitKw; }
};

// Nearest multiple of 2.5 kW in [0, 22.5], half-way ties round up.
double quantize_heater_kw(double kw);

struct TankConfig {
  double volume_l = 200.0;
  double cp = kWaterCp;
  double rho = kWaterRho;
  double ua_w_per_k = 5.0;   // standing loss
  double ambient_c = 20.0;

  double mass_kg() const { return volume_l / 1000.0 * rho; }
  double heat_capacity_j_per_k() const { return mass_kg() * cp; }
};

// Well-mixed accumulator tank, explicit Euler. Temperature is clamped to
// [0, 100] degC and the clamp is flagged.
struct AccumulatorTank {
  TankConfig cfg;
  double temp_c = 50.0;
  bool clamped = false;

  void step(double p_in_kw, double p_draw_kw, double dt_s);
};

struct PipeConfig {
  double length_m = 880.0;
  double area_m2 = 3.1416e-4;      // ~DN20
  double mass_flow_kg_s = 0.1;
  double loss_rate_per_s = 0.0;    // first-order decay toward ambient
  double ambient_c = 20.0;
  double cp = kWaterCp;
  double rho = kWaterRho;

  double water_mass_kg() const { return area_m2 * length_m * rho; }
  double velocity_m_s() const {
    return mass_flow_kg_s / (rho * area_m2);
  }
};

// Plug-flow pipe: fluid parcels advect without mixing, so a step at the
// inlet appears at the outlet one residence time (length/velocity) later.
// Every parcel relaxes toward ambient at loss_rate_per_s, which also covers
// the zero-flow case (stagnant water keeps cooling).
class PipeLoop {
 public:
  explicit PipeLoop(const PipeConfig& cfg, double initial_temp_c);

  // Advances one step; returns the outlet temperature.
  double step(double inlet_temp_c, double dt_s);

  double outlet_temp_c() const { return outlet_temp_; }
  double total_mass_kg() const;
  // Thermal energy of the pipe content relative to a reference temperature.
  double energy_j(double ref_temp_c) const;
  const PipeConfig& config() const { return cfg_; }

 private:
  struct Parcel {
    double temp_c;
    double mass_kg;
  };
  PipeConfig cfg_;
  std::deque<Parcel> parcels_;  // front = outlet end
  double outlet_temp_;
};

// CRES building loop: one first-order thermal node fed by the heat pump and
// drained by the L1 demand.
struct CresNodeConfig {
  double heat_capacity_j_per_k = 5.0e6;
  double ua_w_per_k = 150.0;
  double ambient_c = 20.0;
  double demand_kw = 10.0;
};

struct CresNode {
  CresNodeConfig cfg;
  double temp_c = 40.0;
  bool clamped = false;

  void step(bool ehp_on, double ehp_heat_kw, double dt_s);
};

// District heating loop: heater bank -> accumulator tank -> 880 m plug-flow
// pipe -> consumer -> back to the tank. Building 2 is a pass-through
// substation, so the two 440 m pipes act as one series path.
struct DhnConfig {
  TankConfig tank;
  PipeConfig pipe;
  double consumer_demand_kw = 5.0;
  double initial_temp_c = 40.0;
};

class DistrictHeatingNetwork {
 public:
  explicit DistrictHeatingNetwork(const DhnConfig& cfg);

  // Applies the thermal setpoint to the heater bank and advances the loop.
  // Returns the applied heater power in kW.
  double step(double setpoint_kw, double dt_s);

  double tank_temp_c() const { return tank_.temp_c; }
  double heater_output_kw() const { return heater_.output_kw(); }
  double pipe_outlet_c() const { return pipe_.outlet_temp_c(); }

  // Bookkeeping for energy-balance checks (Joules since construction).
  double energy_in_j() const { return energy_in_j_; }
  double energy_out_j() const { return energy_out_j_; }
  double stored_energy_j(double ref_temp_c) const;

 private:
  DhnConfig cfg_;
  HeaterBank heater_;
  AccumulatorTank tank_;
  PipeLoop pipe_;
  double energy_in_j_ = 0.0;
  double energy_out_j_ = 0.0;
};

}  // namespace medsim::thermal
