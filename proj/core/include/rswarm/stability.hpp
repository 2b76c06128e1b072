#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "rswarm/channel.hpp"
#include "rswarm/numerics.hpp"

namespace rswarm {

/// Uniform frequency grid covering [center - span/2, center + span/2].
struct SweepGrid {
  double center_hz = 2e9;
  double span_hz = 20e6;
  double step_hz = 100.0;

  std::size_t size() const;
  double freq(std::size_t i) const;
  double omega(std::size_t i) const;
};

void validate(const SweepGrid& g);

/// Inter-repeater response as a function of angular frequency.
class HrModel {
 public:
  /// Frequency-flat amplitudes with exact propagation phase: the entry at
  /// omega is |h| exp(j(arg h(omega0) - (omega - omega0) tau)).
  static HrModel flat(const CMat& hr_center, const RMat& delay_s, double center_hz);
  static HrModel flat(const ChannelSet& cs);
  /// Exact free-space response of repeaters at the given positions.
  static HrModel free_space(std::vector<Point3> pos);

  int n() const;
  bool amplitude_flat() const { return kind_ == Kind::Flat; }
  CMat at(double omega) const;
  RMat abs_at(double omega) const;

 private:
  enum class Kind { Flat, FreeSpace };
  Kind kind_ = Kind::Flat;
  RMat amp_;
  RMat phase0_;
  RMat delay_;
  double omega0_ = 0.0;
  std::vector<Point3> pos_;
};

struct GershgorinMetrics {
  double d1 = 0.0;
  double d2 = 0.0;
  double d = 0.0;
};

/// Suprema over the grid of D1 = max_n alpha_n sum_n' |h_nn'| and
/// D2 = max_n sum_n' alpha_n' |h_nn'|; D = min(D1, D2).
GershgorinMetrics gershgorin_metrics(const HrModel& hr, const RVec& alpha, const SweepGrid& grid);
GershgorinMetrics gershgorin_metrics(const RMat& abs_hr, const RVec& alpha);

/// inf over the grid of min_n 1 / sum_n' |h_nn'|; +infinity when HR is zero.
double alpha_g(const HrModel& hr, const SweepGrid& grid);
double alpha_g(const RMat& abs_hr);

struct NyquistOptions {
  bool keep_samples = false;
  /// Sub-steps used when a phase increment exceeds pi/2.
  int refine_factor = 16;
  /// Samples on each closing segment t -> det(I - t D_a HR).
  int closure_steps = 256;
};

struct NyquistResult {
  std::vector<double> freq_hz;
  std::vector<cplx> det;
  double min_abs_det = 0.0;
  int winding_number = 0;
  /// Grid intervals that needed local refinement.
  std::size_t refined_intervals = 0;
};

/// Samples det(I - D_a(j omega) HR(j omega)) over the grid and counts how
/// often the closed image encircles the origin. The image is closed by the
/// taper paths t -> det(I - t D_a HR) at both band edges, which models the
/// loop gain rolling off outside the band.
NyquistResult nyquist_sweep(const HrModel& hr, const RepeaterConfig& cfg, const SweepGrid& grid,
                            const NyquistOptions& opt = {});

/// Closed-form determinant for n (odd) repeaters evenly spaced on a circle
/// with common gain alpha and delay nu. beta and tau hold the N0 = (n-1)/2
/// chord gains and delays.
cplx circle_det_closed_form(int n, const RVec& beta, const RVec& tau, double alpha, double nu,
                            double omega);
/// Free-space chords d_i = 2R sin(i pi / n).
cplx circle_det_closed_form(int n, double radius_m, double alpha, double nu, double omega);

/// First n_terms impulses (time, amplitude) of the two-repeater loop
/// response: amplitude (alpha^2 beta)^i at time 2 i (tau + nu).
std::vector<std::pair<double, double>> two_repeater_impulse_train(double alpha, double beta, double tau,
                                                                  double nu, int n_terms);

/// min over the grid of |det(I - alpha HR)| for each common gain (nu = 0).
std::vector<std::pair<double, double>> margin_sweep(const HrModel& hr, const std::vector<double>& alphas,
                                                    const SweepGrid& grid);

inline constexpr double kMarginalDet = 0.05;

struct StabilityReport {
  double d1 = 0.0;
  double d2 = 0.0;
  double d = 0.0;
  double alpha_g = 0.0;
  double min_abs_det = 0.0;
  int winding_number = 0;
  bool gershgorin_pass = false;
  bool nyquist_pass = false;
  /// min_abs_det below kMarginalDet; informational only.
  bool marginal = false;
};

/// gershgorin_pass is D < 1, or D <= eta when a margin is given.
StabilityReport certify(const HrModel& hr, const RepeaterConfig& cfg, const SweepGrid& grid,
                        std::optional<double> eta = std::nullopt);

}  // namespace rswarm
