#include "rswarm/pathloss.hpp"

#include <algorithm>
#include <cmath>

#include "rswarm/error.hpp"

namespace rswarm {

std::string link_class_name(LinkClass c) {
  switch (c) {
    case LinkClass::Direct: return "direct";
    case LinkClass::UserRepeater: return "user_repeater";
    case LinkClass::RepeaterBs: return "repeater_bs";
    case LinkClass::RepeaterRepeater: return "repeater_repeater";
  }
  return "unknown";
}

double SlopeSet::loss_db(double d) const {
  if (d <= breakpoint_m) return intercept_db + slope_db_per_decade * std::log10(d / reference_m);
  const double at_bp = intercept_db + slope_db_per_decade * std::log10(breakpoint_m / reference_m);
  return at_bp + slope_after_db_per_decade * std::log10(d / breakpoint_m);
}

double LosCurve::probability(double d2d) const {
  if (d0_m < 0.0) return 0.0;
  if (decay_m <= 0.0 || d2d <= d0_m) return 1.0;
  const double r = d0_m / d2d;
  return std::clamp(r + std::exp(-d2d / decay_m) * (1.0 - r), 0.0, 1.0);
}

PathlossModel free_space_model() {
  PathlossModel m;
  m.kind = PathlossKind::FreeSpace;
  for (auto& c : m.classes) {
    c.los_prob.decay_m = 0.0;
    c.shadow_los_db = 0.0;
    c.shadow_nlos_db = 0.0;
  }
  return m;
}

PathlossModel uma_umi_approx(const Scenario& s) {
  PathlossModel m;
  m.kind = PathlossKind::LogDistance;
  m.bs_gain_db = 8.0;
  const double fghz = s.carrier_hz / 1e9;
  const double lf = std::log10(fghz);
  auto breakpoint = [&](double h_tx, double h_rx) {
    // Effective heights use a 1 m environment height.
    return 4.0 * std::max(h_tx - 1.0, 0.1) * std::max(h_rx - 1.0, 0.1) * s.carrier_hz / kSpeedOfLight;
  };

  auto uma = [&](double h_high, double h_low) {
    ClassModel c;
    c.los = {28.0 + 20.0 * lf, 22.0, 1.0, breakpoint(h_high, h_low), 40.0};
    c.nlos = {13.54 + 20.0 * lf - 0.6 * (h_low - 1.5), 39.08, 1.0,
              std::numeric_limits<double>::infinity(), 39.08};
    c.shadow_los_db = 4.0;
    c.shadow_nlos_db = 6.0;
    c.los_prob = {18.0, 63.0};
    return c;
  };
  auto umi = [&](double h_high, double h_low) {
    ClassModel c;
    c.los = {32.4 + 20.0 * lf, 21.0, 1.0, breakpoint(h_high, h_low), 40.0};
    c.nlos = {22.4 + 21.3 * lf - 0.3 * (h_low - 1.5), 35.3, 1.0,
              std::numeric_limits<double>::infinity(), 35.3};
    c.shadow_los_db = 4.0;
    c.shadow_nlos_db = 7.82;
    c.los_prob = {18.0, 36.0};
    return c;
  };

  m.cls(LinkClass::Direct) = uma(s.h_bs_m, s.h_ue_m);
  m.cls(LinkClass::RepeaterBs) = uma(s.h_bs_m, s.h_rep_m);
  m.cls(LinkClass::UserRepeater) = umi(s.h_rep_m, s.h_ue_m);
  m.cls(LinkClass::RepeaterRepeater) = umi(s.h_rep_m, s.h_rep_m);
  return m;
}

namespace {

double table_loss(const std::vector<std::pair<double, double>>& t, double d) {
  require(!t.empty(), "pathloss: external table is empty");
  if (d <= t.front().first) return t.front().second;
  if (d >= t.back().first) return t.back().second;
  auto it = std::upper_bound(t.begin(), t.end(), d,
                             [](double v, const std::pair<double, double>& e) { return v < e.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (std::log10(d) - std::log10(lo.first)) / (std::log10(hi.first) - std::log10(lo.first));
  return lo.second + w * (hi.second - lo.second);
}

bool is_bs_link(LinkClass c) { return c == LinkClass::Direct || c == LinkClass::RepeaterBs; }

}  // namespace

double pathloss_db(const PathlossModel& m, LinkClass c, double d3d, bool los, double carrier_hz) {
  require(d3d > 0.0 || m.min_distance_m > 0.0, "pathloss: distance must be positive");
  const double d = std::max(d3d, m.min_distance_m);
  const ClassModel& cm = m.cls(c);
  switch (m.kind) {
    case PathlossKind::FreeSpace: {
      const double omega = 2.0 * kPi * carrier_hz;
      return -amplitude_to_db(kSpeedOfLight / (2.0 * omega * d));
    }
    case PathlossKind::LogDistance: {
      const double l_los = cm.los.loss_db(d);
      if (los) return l_los;
      const double l_nlos = cm.nlos.loss_db(d);
      return cm.nlos_floor_los ? std::max(l_los, l_nlos) : l_nlos;
    }
    case PathlossKind::ExternalTable:
      return table_loss(cm.table, d);
  }
  return 0.0;
}

double large_scale_gain(const PathlossModel& m, LinkClass c, double d3d, bool los,
                        double carrier_hz, double shadow_db) {
  const double gain_db = is_bs_link(c) ? m.bs_gain_db : 0.0;
  return db_to_power(gain_db - pathloss_db(m, c, d3d, los, carrier_hz) + shadow_db);
}

double los_probability(const PathlossModel& m, LinkClass c, double d2d) {
  if (m.kind == PathlossKind::FreeSpace) return 1.0;
  return m.cls(c).los_prob.probability(d2d);
}

double mean_gain(const PathlossModel& m, LinkClass c, double d2d, double d3d, double carrier_hz) {
  const double p = los_probability(m, c, d2d);
  return p * large_scale_gain(m, c, d3d, true, carrier_hz) +
         (1.0 - p) * large_scale_gain(m, c, d3d, false, carrier_hz);
}

LinkDraw draw_link(const PathlossModel& m, LinkClass c, const Point3& a, const Point3& b,
                   double carrier_hz, bool force_los, LinkRngs rngs) {
  const double d3 = (a - b).norm();
  const double d2 = horizontal_distance(a, b);
  LinkDraw out;
  if (m.kind == PathlossKind::FreeSpace) {
    out.los = true;
  } else if (force_los) {
    out.los = true;
  } else {
    const double p = los_probability(m, c, d2);
    const double u = rngs.los ? rngs.los->uniform() : 0.0;
    out.los = u < p;
  }
  const ClassModel& cm = m.cls(c);
  const double sigma = out.los ? cm.shadow_los_db : cm.shadow_nlos_db;
  double shadow = 0.0;
  if (m.kind != PathlossKind::FreeSpace && sigma > 0.0 && rngs.shadow)
    shadow = sigma * rngs.shadow->normal();
  out.beta = large_scale_gain(m, c, d3, out.los, carrier_hz, shadow);
  return out;
}

LinkGain link_gain(const PathlossModel& m, LinkClass c, const Point3& tx, const Point3& rx,
                   double omega, bool force_los, LinkRngs rngs) {
  const double carrier = omega / (2.0 * kPi);
  const LinkDraw d = draw_link(m, c, tx, rx, carrier, force_los, rngs);
  LinkGain out;
  out.los = d.los;
  const double amp = std::sqrt(d.beta);
  if (d.los) {
    const double dist = std::max((tx - rx).norm(), m.min_distance_m);
    out.h = amp * std::polar(1.0, -omega * dist / kSpeedOfLight);
  } else {
    require(rngs.fading != nullptr, "link_gain: NLoS link needs a fading stream");
    out.h = amp * rngs.fading->complex_normal();
  }
  return out;
}

}  // namespace rswarm
