#pragma once

#include <vector>

#include "rswarm/channel.hpp"
#include "rswarm/numerics.hpp"
#include "rswarm/scenario.hpp"

namespace rswarm {

enum class LogBase { Bits, Nats };

/// log(x) in the requested base.
double log_in(double x, LogBase base);

struct UplinkSystem {
  CMat h;      // M x K composite channel
  CMat sigma;  // M x M noise covariance
  double sigma_b2 = 0.0;
  double sigma_r2 = 0.0;

  int m() const { return static_cast<int>(h.rows()); }
  int k() const { return static_cast<int>(h.cols()); }
};

/// H = HD + HB G HU and Sigma = sB2 I + sR2 HB G G^H HB^H. With use_full_G
/// false, G is replaced by D_a (inter-repeater coupling ignored).
UplinkSystem assemble(const ChannelSet& cs, const RepeaterConfig& cfg, const NoisePowers& noise,
                      bool use_full_G);

/// log det(I + p Sigma^{-1} H H^H), evaluated on the pre-whitened channel.
double sum_capacity(const UplinkSystem& sys, double p_max, LogBase base = LogBase::Bits);

struct SubsetBound {
  std::vector<int> users;
  double bound = 0.0;
};

/// One rate bound per nonempty user subset (2^K - 1 entries, subsets in
/// increasing bitmask order). Raises TooManyUsers when K > k_max.
std::vector<SubsetBound> capacity_region_constraints(const UplinkSystem& sys, double p_max, int k_max = 10,
                                                     LogBase base = LogBase::Bits);

/// rho_k |c^H h_k|^2 / (c^H (sum_{k' != k} rho_k' h_k' h_k'^H + Sigma) c).
double sinr(const UplinkSystem& sys, const RVec& rho, const CVec& c, int k);

/// sqrt(rho_k) (H D_rho H^H + Sigma)^{-1} h_k for every user (columns).
CMat mmse_combiners(const UplinkSystem& sys, const RVec& rho);
CVec mmse_combiner(const UplinkSystem& sys, const RVec& rho, int k);

/// 1 / (1 - rho_k h_k^H (H D_rho H^H + Sigma)^{-1} h_k) - 1.
double sinr_mmse_closed_form(const UplinkSystem& sys, const RVec& rho, int k);

/// c^H (H D_rho H^H + Sigma) c - 2 sqrt(rho_k) Re(c^H h_k) + 1.
double mse(const UplinkSystem& sys, const RVec& rho, const CVec& c, int k);

/// Per-user rates log(1 + SINR_k) with MMSE combining.
RVec user_rates(const UplinkSystem& sys, const RVec& rho, LogBase base = LogBase::Bits);

/// sum_k gamma_k log(1 + SINR_k) with MMSE combining.
double weighted_sum_rate(const UplinkSystem& sys, const RVec& rho, const RVec& gamma,
                         LogBase base = LogBase::Bits);

/// Per-estimate variance of the zero-forcing estimate in the two-user,
/// one-repeater orthogonal toy model: (1 + a^2) / (1 + 2 a^2) sigma2.
double blue_variance_toy(double alpha, double sigma2);

/// H D_rho H^H + Sigma.
CMat received_covariance(const UplinkSystem& sys, const RVec& rho);

}  // namespace rswarm
