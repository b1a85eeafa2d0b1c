// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "medsim/grid.hpp"

namespace medsim::grid {

struct ProfilePoint {
  double t_s = 0.0;
  double p_kw = 0.0;
  double q_kvar = 0.0;
};

// Piecewise-linear P/Q time series for one load or PV attachment.
// Sampling beyond the last breakpoint holds the final value (flagged so the
// caller can warn once).
struct ProfileSeries {
  std::string name;
  std::string bus;
  std::vector<ProfilePoint> points;  // sorted by t_s

  ProfilePoint sample(double t_s) const;
  bool past_end(double t_s) const;
};

struct ProfileSet {
  std::vector<ProfileSeries> series;

  // Injections at time t for a given model (resolves bus names).
  // `past_end` (optional) is set when any series was sampled beyond its
  // final breakpoint.
  std::vector<Injection> injections_at(const GridModel& model, double t_s,
                                       bool* past_end = nullptr) const;
};

ProfileSet load_profiles(const nlohmann::json& j);
nlohmann::json profiles_to_json(const ProfileSet& p);

}  // namespace medsim::grid
