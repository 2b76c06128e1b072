#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace rswarm {

using Point3 = Eigen::Vector3d;

/// Single-cell deployment parameters. Defaults are the sub-6 GHz (FR1)
/// setup: 6 GHz carrier, 20 MHz, 1000 m cell, 64 BS antennas, 20 users and
/// 40 repeaters.
struct Scenario {
  double cell_radius_m = 1000.0;
  int num_bs_antennas = 64;  // M
  int num_users = 20;        // K
  int num_repeaters = 40;    // N
  double carrier_hz = 6e9;
  double bandwidth_hz = 20e6;
  double h_bs_m = 25.0;
  double h_rep_m = 10.0;
  double h_ue_m = 1.5;
  double p_max_dbm = 23.0;
  double p_max_rep_dbm = 23.0;
  double a_max_db = 90.0;
  double noise_figure_db = 9.0;
  double noise_density_dbm_hz = -174.0;
  /// Repeater-to-BS noise power ratio (linear).
  double rep_noise_ratio = 1.0;
  double min_ue_bs_dist_m = 35.0;
  double min_rep_bs_dist_m = 100.0;
  std::uint64_t seed = 1;
  double eta = 0.9;
  bool los_r2b_forced = true;
  /// BS uniform linear array element spacing in wavelengths.
  double bs_element_spacing_wl = 0.5;

  double p_max_w() const;
  double p_max_rep_w() const;
  double a_max_linear() const;
  double omega() const;
  double wavelength_m() const;
};

/// Throws InvalidArgument when an invariant is broken (M >= N, counts,
/// eta in (0, 1], positive geometry).
void validate(const Scenario& s);

struct Layout {
  Point3 bs_pos{0.0, 0.0, 0.0};
  std::vector<Point3> user_pos;
  std::vector<Point3> rep_pos;
};

double horizontal_distance(const Point3& a, const Point3& b);

/// K users uniform over the annulus [min_ue_bs_dist_m, cell_radius_m] around
/// the BS. Deterministic in (seed, substream).
std::vector<Point3> place_users(const Scenario& s, std::uint64_t substream = 0);

/// Hexagonal lattice points centered at the BS. The pitch is the largest one
/// (found by bisection) whose lattice still holds N points in the annulus
/// [min_rep_bs_dist_m, cell_radius_m]; the N innermost points are kept with
/// ties broken by angle.
std::vector<Point3> place_repeaters_hex(const Scenario& s);

/// Pitch picked by place_repeaters_hex; exposed for diagnostics.
double hex_pitch(const Scenario& s);

/// n points at angles 2*pi*i/n on a circle of the given radius (height h).
std::vector<Point3> place_repeaters_circle(int n, double radius_m, double height_m = 0.0);

/// Full layout: BS at origin (height h_bs_m), users, hex repeaters.
Layout make_layout(const Scenario& s, std::uint64_t substream = 0);

struct NoisePowers {
  double bs_w = 0.0;   // sigma_B^2
  double rep_w = 0.0;  // sigma_R^2
};

NoisePowers noise_power(const Scenario& s);

}  // namespace rswarm
