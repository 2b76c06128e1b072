#pragma once

#include <array>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rswarm/numerics.hpp"
#include "rswarm/rng.hpp"
#include "rswarm/scenario.hpp"

namespace rswarm {

enum class LinkClass { Direct = 0, UserRepeater = 1, RepeaterBs = 2, RepeaterRepeater = 3 };
inline constexpr int kNumLinkClasses = 4;

std::string link_class_name(LinkClass c);

enum class PathlossKind { FreeSpace, LogDistance, ExternalTable };

/// loss(d) = intercept + slope * log10(d / reference) up to the breakpoint,
/// then continues with slope_after (continuous at the breakpoint).
struct SlopeSet {
  double intercept_db = 0.0;
  double slope_db_per_decade = 20.0;
  double reference_m = 1.0;
  double breakpoint_m = std::numeric_limits<double>::infinity();
  double slope_after_db_per_decade = 40.0;

  double loss_db(double d) const;
};

/// p(d) = 1 for d <= d0, else d0/d + exp(-d/decay) * (1 - d0/d).
/// decay <= 0 means "always LoS"; d0 < 0 means "never LoS".
struct LosCurve {
  double d0_m = 18.0;
  double decay_m = 63.0;

  double probability(double d2d) const;
};

struct ClassModel {
  SlopeSet los;
  SlopeSet nlos;
  /// NLoS loss is max(nlos, los), as in the urban macro/micro models.
  bool nlos_floor_los = true;
  double shadow_los_db = 0.0;
  double shadow_nlos_db = 0.0;
  LosCurve los_prob;
  /// Tabulated (distance_m, loss_db) pairs for ExternalTable; interpolated
  /// linearly in log10(distance) and held constant outside the range.
  std::vector<std::pair<double, double>> table;
};

struct PathlossModel {
  PathlossKind kind = PathlossKind::FreeSpace;
  std::array<ClassModel, kNumLinkClasses> classes{};
  /// BS-side antenna gain added to Direct and RepeaterBs links.
  double bs_gain_db = 0.0;
  /// Distances are floored here before evaluating any loss.
  double min_distance_m = 1.0;

  const ClassModel& cls(LinkClass c) const { return classes[static_cast<int>(c)]; }
  ClassModel& cls(LinkClass c) { return classes[static_cast<int>(c)]; }
};

/// Exact free-space amplitude c / (2 omega d); always LoS, no shadowing.
PathlossModel free_space_model();

/// Dual-slope log-distance fits of the 3GPP urban macro (Direct, RepeaterBs)
/// and urban micro (UserRepeater, RepeaterRepeater) street models. The
/// breakpoints depend on the node heights and carrier of `s`.
PathlossModel uma_umi_approx(const Scenario& s);

/// Loss in dB (without BS gain or shadowing) at 3-D distance d.
double pathloss_db(const PathlossModel& m, LinkClass c, double d3d, bool los, double carrier_hz);

/// Linear large-scale power gain beta, including the BS gain for BS links
/// and the supplied shadowing realization (dB).
double large_scale_gain(const PathlossModel& m, LinkClass c, double d3d, bool los,
                        double carrier_hz, double shadow_db = 0.0);

double los_probability(const PathlossModel& m, LinkClass c, double d2d);

/// p * beta_LoS + (1 - p) * beta_NLoS with no shadowing.
double mean_gain(const PathlossModel& m, LinkClass c, double d2d, double d3d, double carrier_hz);

/// Random state consumed when synthesizing one link.
struct LinkRngs {
  CounterRng* los = nullptr;
  CounterRng* shadow = nullptr;
  CounterRng* fading = nullptr;
};

struct LinkDraw {
  double beta = 0.0;  // large-scale power gain
  bool los = false;
};

/// Draws LoS presence (unless forced) and shadowing for one link.
LinkDraw draw_link(const PathlossModel& m, LinkClass c, const Point3& a, const Point3& b,
                   double carrier_hz, bool force_los, LinkRngs rngs);

struct LinkGain {
  cplx h;
  bool los = false;
};

/// Complex single-antenna link coefficient at angular frequency omega:
/// sqrt(beta) * exp(-j omega d / c) when LoS, sqrt(beta) * CN(0, 1) otherwise.
LinkGain link_gain(const PathlossModel& m, LinkClass c, const Point3& tx, const Point3& rx,
                   double omega, bool force_los, LinkRngs rngs);

}  // namespace rswarm
