// SPDX-License-Identifier: Apache-2.0
#include "medsim/thermal.hpp"

#include <algorithm>
#include <cmath>

namespace medsim::thermal {

static void require_positive_dt(double dt_s) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("dt must be > 0");
}

double quantize_heater_kw(double kw) {
  double steps = std::floor(kw / HeaterBank::kUnitKw + 0.5);  // ties go up
  steps = std::clamp(steps, 0.0, static_cast<double>(HeaterBank::kUnits));
  return steps * HeaterBank::kUnitKw;
}

double HeaterBank::set_power(double requested_kw) {
  active_count = static_cast<int>(quantize_heater_kw(requested_kw) / kUnitKw);
  return output_kw();
}

void AccumulatorTank::step(double p_in_kw, double p_draw_kw, double dt_s) {
  require_positive_dt(dt_s);
  double flux_w = (p_in_kw - p_draw_kw) * 1e3 -
                  cfg.ua_w_per_k * (temp_c - cfg.ambient_c);
  temp_c += flux_w * dt_s / cfg.heat_capacity_j_per_k();
  clamped = temp_c < 0.0 || temp_c > 100.0;
  temp_c = std::clamp(temp_c, 0.0, 100.0);
}

PipeLoop::PipeLoop(const PipeConfig& cfg, double initial_temp_c)
    : cfg_(cfg), outlet_temp_(initial_temp_c) {
  parcels_.push_back({initial_temp_c, cfg_.water_mass_kg()});
}

double PipeLoop::step(double inlet_temp_c, double dt_s) {
  require_positive_dt(dt_s);

  // Heat loss: every parcel relaxes toward ambient, flowing or not.
  if (cfg_.loss_rate_per_s > 0.0) {
    double decay = std::exp(-cfg_.loss_rate_per_s * dt_s);
    for (auto& p : parcels_) {
      p.temp_c = cfg_.ambient_c + (p.temp_c - cfg_.ambient_c) * decay;
    }
  }

  double m_in = cfg_.mass_flow_kg_s * dt_s;
  if (m_in <= 0.0) {
    // Stagnant: the outlet just sees the (cooling) end parcel.
    outlet_temp_ = parcels_.front().temp_c;
    return outlet_temp_;
  }

  // Advection: the incoming parcel displaces an equal mass at the outlet.
  parcels_.push_back({inlet_temp_c, m_in});
  double m_out = m_in;
  double heat_sum = 0.0;
  while (m_out > 0.0 && !parcels_.empty()) {
    auto& front = parcels_.front();
    double take = std::min(front.mass_kg, m_out);
    heat_sum += take * front.temp_c;
    front.mass_kg -= take;
    m_out -= take;
    if (front.mass_kg <= 1e-12) parcels_.pop_front();
  }
  outlet_temp_ = heat_sum / m_in;
  return outlet_temp_;
}

double PipeLoop::total_mass_kg() const {
  double m = 0.0;
  for (const auto& p : parcels_) m += p.mass_kg;
  return m;
}

double PipeLoop::energy_j(double ref_temp_c) const {
  double e = 0.0;
  for (const auto& p : parcels_) {
    e += p.mass_kg * cfg_.cp * (p.temp_c - ref_temp_c);
  }
  return e;
}

void CresNode::step(bool ehp_on, double ehp_heat_kw, double dt_s) {
  require_positive_dt(dt_s);
  double flux_w = (ehp_on ? ehp_heat_kw : 0.0) * 1e3 - cfg.demand_kw * 1e3 -
                  cfg.ua_w_per_k * (temp_c - cfg.ambient_c);
  temp_c += flux_w * dt_s / cfg.heat_capacity_j_per_k;
  clamped = temp_c < 0.0 || temp_c > 100.0;
  temp_c = std::clamp(temp_c, 0.0, 100.0);
}

DistrictHeatingNetwork::DistrictHeatingNetwork(const DhnConfig& cfg)
    : cfg_(cfg), pipe_(cfg.pipe, cfg.initial_temp_c) {
  tank_.cfg = cfg.tank;
  tank_.temp_c = cfg.initial_temp_c;
}

double DistrictHeatingNetwork::step(double setpoint_kw, double dt_s) {
  require_positive_dt(dt_s);
  double applied_kw = heater_.set_power(setpoint_kw);

  double supply_c = tank_.temp_c;  // pipe inlet rides at the tank temperature
  double outlet_c = pipe_.step(supply_c, dt_s);

  double m_dot = cfg_.pipe.mass_flow_kg_s;
  double draw_kw = 0.0;
  if (m_dot > 0.0) {
    // Consumer extracts its demand from the arriving water; the rest of the
    // enthalpy difference returns to the tank.
    double return_c = outlet_c - cfg_.consumer_demand_kw * 1e3 /
                                     (m_dot * cfg_.pipe.cp);
    draw_kw = m_dot * cfg_.pipe.cp * (supply_c - return_c) / 1e3;
    energy_out_j_ += cfg_.consumer_demand_kw * 1e3 * dt_s;
  }
  tank_.step(applied_kw, draw_kw, dt_s);
  energy_in_j_ += applied_kw * 1e3 * dt_s;
  return applied_kw;
}

double DistrictHeatingNetwork::stored_energy_j(double ref_temp_c) const {
  double tank_e = tank_.cfg.heat_capacity_j_per_k() * (tank_.temp_c - ref_temp_c);
  return tank_e + pipe_.energy_j(ref_temp_c);
}

}  // namespace medsim::thermal
