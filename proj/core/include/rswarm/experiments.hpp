#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rswarm/channel.hpp"
#include "rswarm/config.hpp"
#include "rswarm/csv.hpp"
#include "rswarm/optimizer.hpp"
#include "rswarm/stability.hpp"

namespace rswarm {

struct ExperimentOutput {
  std::string name;
  std::vector<Table> tables;
  std::string summary_json;
};

const std::vector<std::string>& experiment_names();

/// Every experiment is a pure function of (config, seed, trials). The seed
/// replaces scenario.seed; trial t draws users and channels from substream t.
ExperimentOutput run_experiment(const std::string& name, const Config& cfg, std::uint64_t seed, int trials);

/// Writes each table as <dir>/<table>.csv plus summary.json and the resolved
/// config.json. Creates `dir` if needed.
void write_outputs(const ExperimentOutput& out, const std::string& dir, const Config& cfg);

struct TrialSystem {
  Layout layout;
  ChannelSet cs;
};

TrialSystem make_trial(const Config& cfg, std::uint64_t trial);

/// Same direct channel, no repeaters.
ChannelSet without_repeaters(const ChannelSet& cs);

struct TrialResult {
  OptState state;
  double sum_rate = 0.0;      // equal-weight rate at the final point
  double sum_capacity = 0.0;  // at the final gains, all users at p_max
  RVec user_rates;
  StabilityReport stability;  // only filled when N > 0
};

/// Initializes and runs the optimizer on `cs`, then certifies the final
/// gains over cfg.check_grid().
TrialResult optimize(const Config& cfg, const ChannelSet& cs);

/// Gain maximizing the single-repeater SNR on the user-repeater-BS line.
double placement_alpha(double beta_u, double beta_d, double sigma_r2, double sigma_b2, double p_max,
                       double p_max_rep, double a_max);

/// Centered moving average over a window (in samples on each side).
std::vector<double> moving_average(const std::vector<double>& v, int half_window);

}  // namespace rswarm
