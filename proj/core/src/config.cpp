#include "rswarm/config.hpp"

#include <fstream>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "rswarm/error.hpp"

namespace rswarm {

using nlohmann::json;

OptConfig Config::opt_config() const {
  OptConfig o = optimizer;
  o.eta = scenario.eta;
  return o;
}

SweepGrid Config::check_grid() const { return {scenario.carrier_hz, check_span_hz, check_step_hz}; }

PathlossModel make_pathloss(const PathlossSpec& spec, const Scenario& s) {
  PathlossModel m;
  if (spec.preset == "uma-umi-approx") {
    m = uma_umi_approx(s);
  } else if (spec.preset == "free-space") {
    m = free_space_model();
  } else if (spec.preset == "external-table") {
    m = free_space_model();
    m.kind = PathlossKind::ExternalTable;
    for (int c = 0; c < kNumLinkClasses; ++c) {
      const std::string name = link_class_name(static_cast<LinkClass>(c));
      bool found = false;
      for (const auto& [key, table] : spec.tables) {
        if (key != name) continue;
        found = true;
        for (std::size_t i = 1; i < table.size(); ++i)
          if (!(table[i].first > table[i - 1].first))
            raise(ErrorCode::ConfigError, "pathloss table '" + name + "' must have increasing distances");
        for (const auto& e : table)
          if (!(e.first > 0.0)) raise(ErrorCode::ConfigError, "pathloss table distances must be positive");
        m.classes[c].table = table;
      }
      if (!found || m.classes[c].table.empty())
        raise(ErrorCode::ConfigError, "pathloss: external-table needs a non-empty table for '" + name + "'");
    }
  } else {
    raise(ErrorCode::ConfigError, "pathloss: unknown preset '" + spec.preset + "'");
  }
  if (spec.bs_gain_db) m.bs_gain_db = *spec.bs_gain_db;
  if (spec.min_distance_m) {
    if (!(*spec.min_distance_m > 0.0)) raise(ErrorCode::ConfigError, "pathloss: min_distance_m must be > 0");
    m.min_distance_m = *spec.min_distance_m;
  }
  if (!spec.shadowing)
    for (auto& c : m.classes) c.shadow_los_db = c.shadow_nlos_db = 0.0;
  return m;
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const Config& c) {
  const Scenario& s = c.scenario;
  json j;
  j["scenario"] = {
      {"cell_radius_m", s.cell_radius_m},
      {"M", s.num_bs_antennas},
      {"K", s.num_users},
      {"N", s.num_repeaters},
      {"carrier_hz", s.carrier_hz},
      {"bandwidth_hz", s.bandwidth_hz},
      {"h_bs_m", s.h_bs_m},
      {"h_rep_m", s.h_rep_m},
      {"h_ue_m", s.h_ue_m},
      {"p_max_dbm", s.p_max_dbm},
      {"p_max_rep_dbm", s.p_max_rep_dbm},
      {"a_max_db", s.a_max_db},
      {"noise_figure_db", s.noise_figure_db},
      {"noise_density_dbm_hz", s.noise_density_dbm_hz},
      {"rep_noise_ratio", s.rep_noise_ratio},
      {"min_ue_bs_dist_m", s.min_ue_bs_dist_m},
      {"min_rep_bs_dist_m", s.min_rep_bs_dist_m},
      {"seed", s.seed},
      {"eta", s.eta},
      {"los_r2b_forced", s.los_r2b_forced},
      {"bs_element_spacing_wl", s.bs_element_spacing_wl},
  };
  json tables = json::object();
  for (const auto& [k, t] : c.pathloss.tables) {
    json rows = json::array();
    for (const auto& [d, l] : t) rows.push_back({d, l});
    tables[k] = rows;
  }
  j["pathloss"] = {
      {"preset", c.pathloss.preset},
      {"bs_gain_db", opt_json(c.pathloss.bs_gain_db)},
      {"min_distance_m", opt_json(c.pathloss.min_distance_m)},
      {"shadowing", c.pathloss.shadowing},
      {"tables", tables},
  };
  const OptConfig& o = c.optimizer;
  json gamma = json::array();
  for (Eigen::Index i = 0; i < o.gamma.size(); ++i) gamma.push_back(o.gamma(i));
  j["optimizer"] = {
      {"c3", o.c3 == C3Variant::First ? "first" : "second"},
      {"enforce_c5", o.enforce_c5},
      {"i_max", o.i_max},
      {"eps", o.eps},
      {"gamma", gamma},
      {"log_base", o.base == LogBase::Bits ? "bits" : "nats"},
      {"qp_tol", o.qp.tol},
      {"qp_max_iterations", o.qp.max_iterations},
  };
  j["stability"] = {{"span_hz", c.check_span_hz}, {"step_hz", c.check_step_hz}};
  const ExperimentParams& e = c.experiment;
  j["experiment"] = {
      {"motivating",
       {{"user_distance_m", e.motivating.user_distance_m},
        {"user_spacing_m", e.motivating.user_spacing_m},
        {"line_offset_m", e.motivating.line_offset_m},
        {"span_m", e.motivating.span_m},
        {"step_m", e.motivating.step_m},
        {"window_m", e.motivating.window_m},
        {"alpha_mode", e.motivating.alpha_mode}}},
      {"placement",
       {{"user_distance_m", e.placement.user_distance_m},
        {"step_m", e.placement.step_m},
        {"noise_ratios", e.placement.noise_ratios}}},
      {"repeater_counts", e.repeater_counts},
      {"etas", e.etas},
      {"circle",
       {{"n", e.circle.n},
        {"radius_m", e.circle.radius_m},
        {"center_hz", e.circle.center_hz},
        {"span_hz", e.circle.span_hz},
        {"step_hz", e.circle.step_hz},
        {"offsets_db", e.circle.offsets_db},
        {"image_decimation", e.circle.image_decimation}}},
  };
  return j;
}

[[noreturn]] void config_error(const std::string& msg) { raise(ErrorCode::ConfigError, msg); }

bool compatible(const json& def, const json& val) {
  if (def.is_null()) return true;
  if (def.is_number()) return val.is_number();
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return false;
}

// Merges `src` into `dst`; every key of `src` must already exist in `dst`,
// except below the free-form "tables" object.
void merge(json& dst, const json& src, const std::string& path, bool free_form) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!dst.contains(it.key())) {
      if (!free_form) config_error("unknown config key '" + key + "'");
      dst[it.key()] = it.value();
      continue;
    }
    json& d = dst[it.key()];
    if (!compatible(d, it.value())) config_error("config key '" + key + "' has the wrong type");
    if (d.is_object() && it.value().is_object()) {
      merge(d, it.value(), key, free_form || it.key() == "tables");
    } else {
      d = it.value();
    }
  }
}

void apply_override(json& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) config_error("override '" + spec + "' must look like key.path=value");
  const std::string path = spec.substr(0, eq);
  const std::string text = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  if (path == "pathloss" && value.is_string()) value = json{{"preset", value}};
  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) config_error("override '" + spec + "' has an empty key segment");
    parts.push_back(p);
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  merge(root, patch, "", false);
}

template <class T>
T get(const json& j, const char* key) {
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if (!j.at(key).is_number_integer()) config_error(std::string("config key '") + key + "' must be an integer");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("config key '") + key + "': " + e.what());
  }
}

Config from_json(const json& j) {
  Config c;
  const json& js = j.at("scenario");
  Scenario& s = c.scenario;
  s.cell_radius_m = get<double>(js, "cell_radius_m");
  s.num_bs_antennas = get<int>(js, "M");
  s.num_users = get<int>(js, "K");
  s.num_repeaters = get<int>(js, "N");
  s.carrier_hz = get<double>(js, "carrier_hz");
  s.bandwidth_hz = get<double>(js, "bandwidth_hz");
  s.h_bs_m = get<double>(js, "h_bs_m");
  s.h_rep_m = get<double>(js, "h_rep_m");
  s.h_ue_m = get<double>(js, "h_ue_m");
  s.p_max_dbm = get<double>(js, "p_max_dbm");
  s.p_max_rep_dbm = get<double>(js, "p_max_rep_dbm");
  s.a_max_db = get<double>(js, "a_max_db");
  s.noise_figure_db = get<double>(js, "noise_figure_db");
  s.noise_density_dbm_hz = get<double>(js, "noise_density_dbm_hz");
  s.rep_noise_ratio = get<double>(js, "rep_noise_ratio");
  s.min_ue_bs_dist_m = get<double>(js, "min_ue_bs_dist_m");
  s.min_rep_bs_dist_m = get<double>(js, "min_rep_bs_dist_m");
  if (!js.at("seed").is_number_unsigned()) config_error("config key 'seed' must be a nonnegative integer");
  s.seed = get<std::uint64_t>(js, "seed");
  s.eta = get<double>(js, "eta");
  s.los_r2b_forced = get<bool>(js, "los_r2b_forced");
  s.bs_element_spacing_wl = get<double>(js, "bs_element_spacing_wl");

  const json& jp = j.at("pathloss");
  c.pathloss.preset = get<std::string>(jp, "preset");
  if (!jp.at("bs_gain_db").is_null()) c.pathloss.bs_gain_db = get<double>(jp, "bs_gain_db");
  if (!jp.at("min_distance_m").is_null()) c.pathloss.min_distance_m = get<double>(jp, "min_distance_m");
  c.pathloss.shadowing = get<bool>(jp, "shadowing");
  for (auto it = jp.at("tables").begin(); it != jp.at("tables").end(); ++it) {
    bool known = false;
    for (int k = 0; k < kNumLinkClasses; ++k) known |= it.key() == link_class_name(static_cast<LinkClass>(k));
    if (!known) config_error("unknown pathloss table '" + it.key() + "'");
    std::vector<std::pair<double, double>> rows;
    try {
      for (const auto& r : it.value()) rows.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
    } catch (const json::exception&) {
      config_error("pathloss table '" + it.key() + "' must be a list of [distance_m, loss_db]");
    }
    c.pathloss.tables.emplace_back(it.key(), rows);
  }

  const json& jo = j.at("optimizer");
  const auto c3 = get<std::string>(jo, "c3");
  if (c3 == "first")
    c.optimizer.c3 = C3Variant::First;
  else if (c3 == "second")
    c.optimizer.c3 = C3Variant::Second;
  else
    config_error("optimizer.c3 must be 'first' or 'second'");
  c.optimizer.enforce_c5 = get<bool>(jo, "enforce_c5");
  c.optimizer.i_max = get<int>(jo, "i_max");
  c.optimizer.eps = get<double>(jo, "eps");
  const auto gamma = get<std::vector<double>>(jo, "gamma");
  c.optimizer.gamma = Eigen::Map<const RVec>(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
  const auto base = get<std::string>(jo, "log_base");
  if (base == "bits")
    c.optimizer.base = LogBase::Bits;
  else if (base == "nats")
    c.optimizer.base = LogBase::Nats;
  else
    config_error("optimizer.log_base must be 'bits' or 'nats'");
  c.optimizer.qp.tol = get<double>(jo, "qp_tol");
  c.optimizer.qp.max_iterations = get<int>(jo, "qp_max_iterations");

  c.check_span_hz = get<double>(j.at("stability"), "span_hz");
  c.check_step_hz = get<double>(j.at("stability"), "step_hz");

  const json& je = j.at("experiment");
  auto& e = c.experiment;
  const json& jm = je.at("motivating");
  e.motivating.user_distance_m = get<double>(jm, "user_distance_m");
  e.motivating.user_spacing_m = get<double>(jm, "user_spacing_m");
  e.motivating.line_offset_m = get<double>(jm, "line_offset_m");
  e.motivating.span_m = get<double>(jm, "span_m");
  e.motivating.step_m = get<double>(jm, "step_m");
  e.motivating.window_m = get<double>(jm, "window_m");
  e.motivating.alpha_mode = get<std::string>(jm, "alpha_mode");
  const json& jpl = je.at("placement");
  e.placement.user_distance_m = get<double>(jpl, "user_distance_m");
  e.placement.step_m = get<double>(jpl, "step_m");
  e.placement.noise_ratios = get<std::vector<double>>(jpl, "noise_ratios");
  e.repeater_counts = get<std::vector<int>>(je, "repeater_counts");
  e.etas = get<std::vector<double>>(je, "etas");
  const json& jc = je.at("circle");
  e.circle.n = get<int>(jc, "n");
  e.circle.radius_m = get<double>(jc, "radius_m");
  e.circle.center_hz = get<double>(jc, "center_hz");
  e.circle.span_hz = get<double>(jc, "span_hz");
  e.circle.step_hz = get<double>(jc, "step_hz");
  e.circle.offsets_db = get<std::vector<double>>(jc, "offsets_db");
  e.circle.image_decimation = get<int>(jc, "image_decimation");
  return c;
}

void validate(const Config& c) {
  try {
    validate(c.scenario);
    validate(c.opt_config());
    validate(c.check_grid());
    (void)make_pathloss(c.pathloss, c.scenario);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(e.what());
  }
  const auto& e = c.experiment;
  if (!(e.motivating.step_m > 0.0 && e.motivating.span_m >= 0.0 && e.motivating.window_m >= 0.0))
    config_error("experiment.motivating: step must be > 0, span and window >= 0");
  if (e.motivating.alpha_mode != "max" && e.motivating.alpha_mode != "zero")
    config_error("experiment.motivating.alpha_mode must be 'max' or 'zero'");
  if (!(e.placement.step_m > 0.0) || e.placement.user_distance_m < 0.0)
    config_error("experiment.placement: step must be > 0 and user distance >= 0");
  for (double r : e.placement.noise_ratios)
    if (r < 0.0) config_error("experiment.placement.noise_ratios must be >= 0");
  for (int n : e.repeater_counts)
    if (n < 0 || n > c.scenario.num_bs_antennas) config_error("experiment.repeater_counts must lie in [0, M]");
  for (double eta : e.etas)
    if (!(eta > 0.0 && eta <= 1.0)) config_error("experiment.etas must lie in (0, 1]");
  if (e.circle.n < 3 || e.circle.n % 2 == 0) config_error("experiment.circle.n must be odd and >= 3");
  if (e.circle.image_decimation < 1) config_error("experiment.circle.image_decimation must be >= 1");
  try {
    validate(SweepGrid{e.circle.center_hz, e.circle.span_hz, e.circle.step_hz});
  } catch (const Error& err) {
    config_error(std::string("experiment.circle: ") + err.what());
  }
}

}  // namespace

Config parse_config(const std::string& json_text, const std::vector<std::string>& overrides) {
  json root = to_json(Config{});
  json user;
  try {
    user = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) config_error("config root must be an object");
  if (user.contains("pathloss") && user["pathloss"].is_string())
    user["pathloss"] = json{{"preset", user["pathloss"]}};
  merge(root, user, "", false);
  for (const auto& o : overrides) apply_override(root, o);
  Config c = from_json(root);
  validate(c);
  return c;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string config_to_json(const Config& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace rswarm
