// SPDX-License-Identifier: Apache-2.0
#include "medsim/profiles.hpp"

#include <algorithm>
#include <stdexcept>

namespace medsim::grid {

ProfilePoint ProfileSeries::sample(double t_s) const {
  if (points.empty()) return {t_s, 0.0, 0.0};
  if (t_s <= points.front().t_s) {
    auto p = points.front();
    p.t_s = t_s;
    return p;
  }
  if (t_s >= points.back().t_s) {
    auto p = points.back();
    p.t_s = t_s;
    return p;
  }
  auto hi = std::upper_bound(
      points.begin(), points.end(), t_s,
      [](double t, const ProfilePoint& p) { return t < p.t_s; });
  auto lo = hi - 1;
  double span = hi->t_s - lo->t_s;
  double a = span > 0 ? (t_s - lo->t_s) / span : 0.0;
  return {t_s, lo->p_kw + a * (hi->p_kw - lo->p_kw),
          lo->q_kvar + a * (hi->q_kvar - lo->q_kvar)};
}

bool ProfileSeries::past_end(double t_s) const {
  return !points.empty() && t_s > points.back().t_s;
}

std::vector<Injection> ProfileSet::injections_at(const GridModel& model,
                                                 double t_s,
                                                 bool* past_end) const {
  std::vector<Injection> out;
  out.reserve(series.size());
  bool any_past = false;
  for (const auto& s : series) {
    auto p = s.sample(t_s);
    out.push_back({model.bus(s.bus), p.p_kw, p.q_kvar});
    any_past = any_past || s.past_end(t_s);
  }
  if (past_end) *past_end = any_past;
  return out;
}

ProfileSet load_profiles(const nlohmann::json& j) {
  ProfileSet set;
  for (const auto& e : j) {
    ProfileSeries s;
    s.name = e.at("name").get<std::string>();
    s.bus = e.at("bus").get<std::string>();
    for (const auto& pt : e.at("points")) {
      if (!pt.is_array() || pt.size() < 2) {
        throw std::runtime_error("profile point must be [t, p(, q)]");
      }
      ProfilePoint p;
      p.t_s = pt[0].get<double>();
      p.p_kw = pt[1].get<double>();
      p.q_kvar = pt.size() > 2 ? pt[2].get<double>() : 0.0;
      s.points.push_back(p);
    }
    std::sort(s.points.begin(), s.points.end(),
              [](const ProfilePoint& a, const ProfilePoint& b) {
                return a.t_s < b.t_s;
              });
    set.series.push_back(std::move(s));
  }
  return set;
}

nlohmann::json profiles_to_json(const ProfileSet& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : p.series) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : s.points) {
      pts.push_back({pt.t_s, pt.p_kw, pt.q_kvar});
    }
    arr.push_back({{"name", s.name}, {"bus", s.bus}, {"points", pts}});
  }
  return arr;
}

}  // namespace medsim::grid
