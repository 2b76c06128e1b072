#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rswarm/numerics.hpp"
#include "rswarm/pathloss.hpp"
#include "rswarm/scenario.hpp"

namespace rswarm {

/// All channel matrices of one realization at one frequency.
struct ChannelSet {
  CMat hd;  // M x K, user -> BS
  CMat hu;  // N x K, user -> repeater
  CMat hb;  // M x N, repeater -> BS
  CMat hr;  // N x N, repeater -> repeater, symmetric
  /// Propagation delays of the inter-repeater links (N x N, seconds).
  RMat hr_delay_s;
  /// Default repeater delays nu (N); copied into RepeaterConfig by make_config.
  RVec rep_delays_s;
  double freq_hz = 0.0;

  int m() const { return static_cast<int>(hd.rows()); }
  int k() const { return static_cast<int>(hd.cols()); }
  int n() const { return static_cast<int>(hr.rows()); }
};

struct RepeaterConfig {
  RVec alpha;  // linear amplitude gains, >= 0
  RVec nu_s;   // delays, >= 0
};

/// Config with the given gains and the channel set's default delays.
RepeaterConfig make_config(const ChannelSet& cs, const RVec& alpha);

/// Throws InvalidArgument for negative or non-finite gains/delays, or gains
/// above a_max (when a_max is finite).
void validate(const RepeaterConfig& cfg, int n, double a_max = std::numeric_limits<double>::infinity());

struct ChannelOptions {
  /// Amplitude placed on the HR diagonal; zero disables self-interference.
  double self_interference_amp = 0.0;
  /// Trial index: selects independent fading, LoS and shadowing substreams.
  std::uint64_t trial = 0;
};

/// Synthesizes every link of the layout from the pathloss model. Each link
/// class draws from its own substream, so HD does not depend on N. The BS is
/// a uniform linear array along x; LoS phases use per-element distances.
ChannelSet build_channels(const Scenario& s, const Layout& l, const PathlossModel& model,
                          const ChannelOptions& opt = {});

/// Free-space HR for repeaters at the given positions, at angular frequency
/// omega (no randomness). Used by the stability sweeps.
CMat free_space_hr(const std::vector<Point3>& pos, double omega);

/// a_n(j omega) = alpha_n exp(-j omega nu_n).
CVec repeater_response(const RepeaterConfig& cfg, double omega);

/// G = (I - D_a HR)^{-1} D_a. Raises SingularMatrix at or beyond the
/// instability boundary.
CMat effective_G(const CMat& hr, const RepeaterConfig& cfg, double omega);
CMat effective_G(const ChannelSet& cs, const RepeaterConfig& cfg);

/// Loop gain of a repeater with self-interference beta_loop: alpha / (1 - alpha beta).
double self_interference_gain(double alpha, double beta_loop);

/// HB with each column rotated by exp(-j omega nu_n), so that
/// HB D_a = HB_tilde D_alpha.
CMat phase_absorbed_hb(const ChannelSet& cs, const RepeaterConfig& cfg);

}  // namespace rswarm
