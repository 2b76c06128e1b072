#include "rswarm/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "rswarm/error.hpp"
#include "rswarm/numerics.hpp"
#include "rswarm/rng.hpp"

namespace rswarm {

double Scenario::p_max_w() const { return dbm_to_watt(p_max_dbm); }
double Scenario::p_max_rep_w() const { return dbm_to_watt(p_max_rep_dbm); }
double Scenario::a_max_linear() const { return db_to_amplitude(a_max_db); }
double Scenario::omega() const { return 2.0 * kPi * carrier_hz; }
double Scenario::wavelength_m() const { return kSpeedOfLight / carrier_hz; }

void validate(const Scenario& s) {
  require(s.num_bs_antennas >= 1 && s.num_users >= 1, "scenario: M and K must be >= 1");
  // N = 0 is the repeater-free baseline.
  require(s.num_repeaters >= 0, "scenario: N must be >= 0");
  require(s.num_bs_antennas >= s.num_repeaters, "scenario: M must be >= N");
  require(s.eta > 0.0 && s.eta <= 1.0, "scenario: eta must lie in (0, 1]");
  require(s.cell_radius_m > 0.0, "scenario: cell radius must be positive");
  require(s.h_bs_m > 0.0 && s.h_rep_m > 0.0 && s.h_ue_m > 0.0, "scenario: heights must be positive");
  require(s.carrier_hz > 0.0 && s.bandwidth_hz > 0.0, "scenario: carrier and bandwidth must be positive");
  require(s.min_ue_bs_dist_m >= 0.0 && s.min_ue_bs_dist_m <= s.cell_radius_m,
          "scenario: min_ue_bs_dist_m must lie in [0, cell_radius_m]");
  require(s.min_rep_bs_dist_m >= 0.0 && s.min_rep_bs_dist_m <= s.cell_radius_m,
          "scenario: min_rep_bs_dist_m must lie in [0, cell_radius_m]");
  require(s.rep_noise_ratio >= 0.0, "scenario: rep_noise_ratio must be >= 0");
  require(s.bs_element_spacing_wl > 0.0, "scenario: element spacing must be positive");
  require(std::isfinite(s.p_max_dbm) && std::isfinite(s.p_max_rep_dbm) && std::isfinite(s.a_max_db),
          "scenario: power limits must be finite");
}

double horizontal_distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x() - b.x(), a.y() - b.y());
}

std::vector<Point3> place_users(const Scenario& s, std::uint64_t substream) {
  validate(s);
  CounterRng rng(s.seed, Stream::UserPlacement, substream);
  const double r0 = s.min_ue_bs_dist_m;
  const double r1 = s.cell_radius_m;
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(s.num_users));
  for (int k = 0; k < s.num_users; ++k) {
    const double u = rng.uniform();
    const double phi = 2.0 * kPi * rng.uniform();
    const double r = std::clamp(std::sqrt(u * (r1 * r1 - r0 * r0) + r0 * r0), r0, r1);
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), s.h_ue_m);
  }
  return out;
}

namespace {

struct LatticePoint {
  double r;
  double angle;  // in [0, 2*pi)
  double x;
  double y;
};

// Lattice basis (p, 0) and (p/2, p*sqrt(3)/2); orientation 0 degrees.
std::vector<LatticePoint> lattice_in_annulus(double pitch, double r_min, double r_max) {
  const double tol = 1e-9 * r_max;
  const int span = static_cast<int>(std::ceil(r_max / (pitch * std::sqrt(3.0) / 2.0))) + 1;
  std::vector<LatticePoint> pts;
  for (int j = -span; j <= span; ++j) {
    for (int i = -2 * span; i <= 2 * span; ++i) {
      const double x = pitch * (i + 0.5 * j);
      const double y = pitch * (std::sqrt(3.0) / 2.0) * j;
      const double r = std::hypot(x, y);
      if (r > r_max + tol || r < r_min - tol) continue;
      double a = std::atan2(y, x);
      if (a < 0.0) a += 2.0 * kPi;
      if (r < tol) a = 0.0;
      pts.push_back({r, a, x, y});
    }
  }
  return pts;
}

}  // namespace

double hex_pitch(const Scenario& s) {
  validate(s);
  const auto n = static_cast<std::size_t>(s.num_repeaters);
  require(n >= 1, "place_repeaters_hex: N must be >= 1");
  const double r_min = s.min_rep_bs_dist_m;
  const double r_max = s.cell_radius_m;
  constexpr double kMinPitch = 1.0;
  auto count = [&](double p) { return lattice_in_annulus(p, r_min, r_max).size(); };
  if (count(kMinPitch) < n)
    raise(ErrorCode::PackingFailed, "place_repeaters_hex: N exceeds lattice points in the annulus");
  double lo = kMinPitch;
  double hi = 2.0 * r_max;
  if (count(hi) >= n) return hi;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count(mid) >= n)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::vector<Point3> place_repeaters_hex(const Scenario& s) {
  const double pitch = hex_pitch(s);
  auto pts = lattice_in_annulus(pitch, s.min_rep_bs_dist_m, s.cell_radius_m);
  const double tol = 1e-9 * s.cell_radius_m;
  std::sort(pts.begin(), pts.end(), [tol](const LatticePoint& a, const LatticePoint& b) {
    if (std::abs(a.r - b.r) > tol) return a.r < b.r;
    return a.angle < b.angle;
  });
  std::vector<Point3> out;
  for (int i = 0; i < s.num_repeaters; ++i) {
    const auto& p = pts[static_cast<std::size_t>(i)];
    // Snap points sitting on the boundary within rounding back inside.
    double scale = 1.0;
    if (p.r > s.cell_radius_m) scale = s.cell_radius_m / p.r;
    if (p.r < s.min_rep_bs_dist_m && p.r > 0.0) scale = s.min_rep_bs_dist_m / p.r;
    out.emplace_back(p.x * scale, p.y * scale, s.h_rep_m);
  }
  return out;
}

std::vector<Point3> place_repeaters_circle(int n, double radius_m, double height_m) {
  require(n >= 2, "place_repeaters_circle: n must be >= 2");
  require(radius_m > 0.0, "place_repeaters_circle: radius must be positive");
  std::vector<Point3> out;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * i / n;
    out.emplace_back(radius_m * std::cos(a), radius_m * std::sin(a), height_m);
  }
  return out;
}

Layout make_layout(const Scenario& s, std::uint64_t substream) {
  validate(s);
  Layout l;
  l.bs_pos = Point3(0.0, 0.0, s.h_bs_m);
  l.user_pos = place_users(s, substream);
  if (s.num_repeaters > 0) l.rep_pos = place_repeaters_hex(s);
  return l;
}

NoisePowers noise_power(const Scenario& s) {
  require(s.bandwidth_hz > 0.0, "noise_power: bandwidth must be positive");
  NoisePowers n;
  n.bs_w = dbm_to_watt(s.noise_density_dbm_hz + s.noise_figure_db + power_to_db(s.bandwidth_hz));
  n.rep_w = s.rep_noise_ratio * n.bs_w;
  return n;
}

}  // namespace rswarm
