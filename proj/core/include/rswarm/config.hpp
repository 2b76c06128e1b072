#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rswarm/optimizer.hpp"
#include "rswarm/pathloss.hpp"
#include "rswarm/scenario.hpp"
#include "rswarm/stability.hpp"

namespace rswarm {

struct PathlossSpec {
  /// "uma-umi-approx", "free-space" or "external-table".
  std::string preset = "uma-umi-approx";
  std::optional<double> bs_gain_db;
  std::optional<double> min_distance_m;
  /// false zeroes every shadowing standard deviation.
  bool shadowing = true;
  /// Per link class (keyed by link_class_name) tables for "external-table".
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> tables;
};

PathlossModel make_pathloss(const PathlossSpec& spec, const Scenario& s);

struct MotivatingParams {
  double user_distance_m = 500.0;
  double user_spacing_m = 40.0;
  /// Signed offset of the repeater line from the user line along the BS
  /// direction; negative moves it toward the BS.
  double line_offset_m = -40.0;
  double span_m = 400.0;
  double step_m = 1.0;
  double window_m = 4.0;
  /// "max" uses min(A_max, output power cap); "zero" turns the repeater off.
  std::string alpha_mode = "max";
};

struct PlacementParams {
  /// 0 means the cell edge.
  double user_distance_m = 0.0;
  double step_m = 5.0;
  std::vector<double> noise_ratios{0.0, 1.0, 10.0};
};

struct CircleParams {
  int n = 15;
  double radius_m = 1000.0;
  double center_hz = 2e9;
  double span_hz = 20e6;
  double step_hz = 100.0;
  std::vector<double> offsets_db{-10.0, -8.0, -6.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0};
  /// Keep every n-th Nyquist image sample in the CSV.
  int image_decimation = 100;
};

struct ExperimentParams {
  MotivatingParams motivating;
  PlacementParams placement;
  std::vector<int> repeater_counts{0, 10, 20, 30, 40};
  std::vector<double> etas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  CircleParams circle;
};

struct Config {
  Scenario scenario;
  PathlossSpec pathloss;
  /// eta is taken from the scenario; the optimizer section has no eta key.
  OptConfig optimizer;
  /// Stability sweep for end-to-end checks, centered on the carrier.
  double check_span_hz = 20e6;
  double check_step_hz = 10e3;
  ExperimentParams experiment;

  OptConfig opt_config() const;
  SweepGrid check_grid() const;
};

/// Parses a JSON document, applies `key.path=value` overrides and validates.
/// Unknown keys raise ConfigError.
Config parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {});
Config load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Fully resolved config as pretty-printed JSON (round-trips through
/// parse_config).
std::string config_to_json(const Config& c);

}  // namespace rswarm
