#pragma once

#include <vector>

#include "rswarm/channel.hpp"
#include "rswarm/qp.hpp"
#include "rswarm/scenario.hpp"
#include "rswarm/uplink.hpp"

namespace rswarm {

/// Which stability row bounds the gains: First is alpha_n sum_n' |h_nn'| <= eta
/// for every n, Second is sum_n' alpha_n' |h_nn'| <= eta for every n.
enum class C3Variant { First, Second };

struct OptConfig {
  double eta = 0.9;
  C3Variant c3 = C3Variant::First;
  /// Cap each repeater's output power at p_max_rep (recomputed from rho).
  bool enforce_c5 = true;
  int i_max = 50;
  double eps = 1e-3;
  /// User weights; empty means all ones.
  RVec gamma;
  LogBase base = LogBase::Bits;
  QpOptions qp;
};

void validate(const OptConfig& cfg);

/// Power, gain and noise limits taken from a scenario.
struct OptLimits {
  double p_max_w = 0.0;
  double p_max_rep_w = 0.0;
  double a_max = 0.0;
  NoisePowers noise;

  static OptLimits from(const Scenario& s);
};

struct OptState {
  CMat combiners;  // M x K, column k is c_k
  RVec varpi;
  RVec rho;
  RVec alpha;
  /// Weighted sum rate before the first pass.
  double initial_rate = 0.0;
  /// Weighted sum rate after each full pass.
  std::vector<double> trace;
  int iter = 0;
  /// MSE values clamped to 1e-12 by update_weights.
  int degenerate_mse_clamps = 0;
};

/// System seen by the optimizer: G replaced by D_a at the current gains.
UplinkSystem optimizer_system(const ChannelSet& cs, const RVec& alpha, const NoisePowers& noise);

CMat update_combiners(const UplinkSystem& sys, const OptState& st);

/// varpi_k = 1 / (1 - sqrt(rho_k) h_k^H c_k). MSE values at or below 1e-12
/// are clamped there and counted in `clamps`.
RVec update_weights(const UplinkSystem& sys, const OptState& st, int* clamps = nullptr);

/// Closed-form per-user power minimizing the weighted MSE with combiners and
/// weights fixed, clamped to [0, p_max]. A nonpositive numerator gives 0.
RVec update_powers(const UplinkSystem& sys, const OptState& st, const RVec& gamma, double p_max);

/// Per-repeater gain cap from the repeater output power limit at powers rho.
RVec c5_caps(const ChannelSet& cs, const RVec& rho, const OptLimits& lim);

/// sum_n' |h_nn'| per repeater.
RVec hr_row_sums(const ChannelSet& cs);

/// The convex QP in the repeater gains with combiners, weights and powers
/// fixed: Q = sum_k gamma_k varpi_k Gamma_k, c = sum_k gamma_k varpi_k psi_k,
/// bounds [0, A_max] tightened by the First stability row and by the output
/// power cap, and linear rows for the Second stability row.
QpProblem build_alpha_qp(const ChannelSet& cs, const OptState& st, const RVec& gamma, const OptConfig& cfg,
                         const OptLimits& lim);

/// rho = p_max; alpha = 0.5 min(A_max, eta alpha_G) for every repeater,
/// further capped by the output power limit when enforced.
OptState initialize(const ChannelSet& cs, const OptConfig& cfg, const OptLimits& lim);

/// Maximum violation of the power, gain, stability and output power
/// constraints (0 when feasible).
double constraint_violation(const ChannelSet& cs, const OptState& st, const OptConfig& cfg,
                            const OptLimits& lim);

/// Block coordinate descent: combiners, weights, powers, then gains, until
/// the weighted sum rate changes by at most eps or i_max passes ran.
OptState run(const ChannelSet& cs, const OptConfig& cfg, const OptLimits& lim, OptState init);
OptState run(const ChannelSet& cs, const Scenario& s, const OptConfig& cfg, OptState init);

}  // namespace rswarm
