#include "rswarm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <thread>

#include <json.hpp>

#include "rswarm/error.hpp"
#include "rswarm/uplink.hpp"

namespace rswarm {

using nlohmann::json;

namespace {

// Runs f(0..n-1) on a small worker pool; results come back in index order
// and the first failure (by index) is rethrown.
template <class F>
auto parallel_map(int n, F f) -> std::vector<decltype(f(0))> {
  using R = decltype(f(0));
  std::vector<R> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> err(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        err[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, std::max(n, 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Config with_seed(Config cfg, std::uint64_t seed) {
  cfg.scenario.seed = seed;
  return cfg;
}

std::string ratio_label(double r) {
  std::string s = format_number(r);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

// ---------------------------------------------------------------------------

ExperimentOutput exp_motivating(const Config& cfg, int trials) {
  const auto& p = cfg.experiment.motivating;
  Scenario s = cfg.scenario;
  s.num_users = 2;
  s.num_repeaters = 1;
  validate(s);
  const PathlossModel model = make_pathloss(cfg.pathloss, s);
  const NoisePowers noise = noise_power(s);
  const OptLimits lim = OptLimits::from(s);

  std::vector<double> ys;
  const int steps = static_cast<int>(std::floor(p.span_m / p.step_m + 1e-9));
  for (int i = 0; i <= steps; ++i) ys.push_back(-0.5 * p.span_m + i * p.step_m);

  Layout base;
  base.bs_pos = Point3(0.0, 0.0, s.h_bs_m);
  base.user_pos = {Point3(p.user_distance_m, -0.5 * p.user_spacing_m, s.h_ue_m),
                   Point3(p.user_distance_m, 0.5 * p.user_spacing_m, s.h_ue_m)};
  const RVec rho = RVec::Constant(2, lim.p_max_w);

  struct PosRates {
    double r1 = 0.0, r2 = 0.0, base = 0.0;
  };
  auto per_trial = [&](int t) {
    std::vector<PosRates> out;
    for (double y : ys) {
      Layout l = base;
      l.rep_pos = {Point3(p.user_distance_m + p.line_offset_m, y, s.h_rep_m)};
      ChannelOptions co;
      co.trial = static_cast<std::uint64_t>(t);
      const ChannelSet cs = build_channels(s, l, model, co);
      double a = 0.0;
      if (p.alpha_mode == "max") a = std::min(lim.a_max, c5_caps(cs, rho, lim)(0));
      const UplinkSystem sys = assemble(cs, make_config(cs, RVec::Constant(1, a)), noise, true);
      const RVec r = user_rates(sys, rho, cfg.optimizer.base);
      const UplinkSystem sys0 = assemble(without_repeaters(cs), RepeaterConfig{RVec(0), RVec(0)}, noise, false);
      out.push_back({r(0), r(1), user_rates(sys0, rho, cfg.optimizer.base).sum()});
    }
    return out;
  };
  const auto all = parallel_map(trials, per_trial);

  std::vector<double> r1(ys.size()), r2(ys.size()), b(ys.size()), sum(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    for (const auto& tr : all) {
      r1[i] += tr[i].r1 / trials;
      r2[i] += tr[i].r2 / trials;
      b[i] += tr[i].base / trials;
    }
    sum[i] = r1[i] + r2[i];
  }
  const int half = static_cast<int>(std::floor(0.5 * p.window_m / p.step_m + 1e-9));
  const auto avg = moving_average(sum, half);

  ExperimentOutput out;
  Table t{"motivating", {"repeater_y_m", "sum_rate", "sum_rate_moving_avg", "rate_user1", "rate_user2",
                         "sum_rate_no_repeater"}, {}};
  for (std::size_t i = 0; i < ys.size(); ++i) t.add({ys[i], sum[i], avg[i], r1[i], r2[i], b[i]});
  out.tables.push_back(std::move(t));
  const auto best = std::max_element(avg.begin(), avg.end());
  json summ = {{"positions", ys.size()},
               {"trials", trials},
               {"baseline_sum_rate", mean(b)},
               {"max_moving_avg_sum_rate", *best},
               {"max_at_y_m", ys[static_cast<std::size_t>(best - avg.begin())]}};
  out.summary_json = summ.dump(2);
  return out;
}

ExperimentOutput exp_placement(const Config& cfg) {
  const auto& p = cfg.experiment.placement;
  const Scenario& s = cfg.scenario;
  const PathlossModel model = make_pathloss(cfg.pathloss, s);
  const NoisePowers noise = noise_power(s);
  const double dist = p.user_distance_m > 0.0 ? p.user_distance_m : s.cell_radius_m;
  const Point3 bs(0.0, 0.0, s.h_bs_m);
  const Point3 ue(dist, 0.0, s.h_ue_m);
  const double f = s.carrier_hz;
  const double beta_d = mean_gain(model, LinkClass::Direct, horizontal_distance(bs, ue), (bs - ue).norm(), f);
  const double snr_direct = s.p_max_w() * beta_d / noise.bs_w;

  ExperimentOutput out;
  Table t;
  t.name = "placement";
  t.header = {"repeater_distance_m", "snr_direct_db"};
  for (double r : p.noise_ratios) {
    t.header.push_back("snr_db_ratio_" + ratio_label(r));
    t.header.push_back("alpha_db_ratio_" + ratio_label(r));
  }
  const int steps = static_cast<int>(std::floor(dist / p.step_m + 1e-9));
  for (int i = 1; i < steps; ++i) {
    const double x = i * p.step_m;
    const Point3 rep(x, 0.0, s.h_rep_m);
    const double beta_u = mean_gain(model, LinkClass::UserRepeater, horizontal_distance(rep, ue), (rep - ue).norm(), f);
    const double beta_b =
        s.los_r2b_forced ? large_scale_gain(model, LinkClass::RepeaterBs, (rep - bs).norm(), true, f)
                         : mean_gain(model, LinkClass::RepeaterBs, horizontal_distance(rep, bs), (rep - bs).norm(), f);
    std::vector<double> row{x, power_to_db(snr_direct)};
    for (double ratio : p.noise_ratios) {
      const double sr2 = ratio * noise.bs_w;
      const double a = placement_alpha(beta_u, beta_d, sr2, noise.bs_w, s.p_max_w(), s.p_max_rep_w(),
                                       s.a_max_linear());
      const double snr = s.p_max_w() * (beta_d + a * a * beta_u * beta_b) / (noise.bs_w + a * a * beta_u * sr2);
      row.push_back(power_to_db(snr));
      row.push_back(a > 0.0 ? amplitude_to_db(a) : -std::numeric_limits<double>::infinity());
    }
    t.add(std::move(row));
  }
  out.tables.push_back(std::move(t));
  out.summary_json = json{{"user_distance_m", dist}, {"snr_direct_db", power_to_db(snr_direct)}}.dump(2);
  return out;
}

struct PairResult {
  TrialResult with;
  TrialResult without;
};

PairResult optimize_pair(const Config& cfg, int t) {
  const TrialSystem ts = make_trial(cfg, static_cast<std::uint64_t>(t));
  PairResult r;
  r.with = optimize(cfg, ts.cs);
  r.without = optimize(cfg, without_repeaters(ts.cs));
  return r;
}

std::vector<double> full_trace(const OptState& st) {
  std::vector<double> v{st.initial_rate};
  v.insert(v.end(), st.trace.begin(), st.trace.end());
  return v;
}

ExperimentOutput exp_convergence(const Config& cfg, int trials) {
  const auto res = parallel_map(trials, [&](int t) { return optimize_pair(cfg, t); });
  std::size_t len = 0;
  for (const auto& r : res) len = std::max({len, full_trace(r.with.state).size(), full_trace(r.without.state).size()});

  Table per{"convergence_trials", {"trial", "iteration", "wsr_with", "wsr_without"}, {}};
  Table avg{"convergence_mean", {"iteration", "wsr_with", "wsr_without"}, {}};
  std::vector<double> mw(len, 0.0), mo(len, 0.0);
  for (int t = 0; t < trials; ++t) {
    const auto a = full_trace(res[t].with.state);
    const auto b = full_trace(res[t].without.state);
    for (std::size_t i = 0; i < len; ++i) {
      const double va = a[std::min(i, a.size() - 1)];
      const double vb = b[std::min(i, b.size() - 1)];
      per.add({static_cast<double>(t), static_cast<double>(i), va, vb});
      mw[i] += va / trials;
      mo[i] += vb / trials;
    }
  }
  for (std::size_t i = 0; i < len; ++i) avg.add({static_cast<double>(i), mw[i], mo[i]});
  ExperimentOutput out;
  out.tables = {std::move(avg), std::move(per)};
  std::vector<double> fw, fo, iw;
  for (const auto& r : res) {
    fw.push_back(r.with.sum_rate);
    fo.push_back(r.without.sum_rate);
    iw.push_back(r.with.state.iter);
  }
  out.summary_json = json{{"trials", trials},
                          {"mean_final_with", mean(fw)},
                          {"mean_final_without", mean(fo)},
                          {"ratio", mean(fo) > 0 ? mean(fw) / mean(fo) : 0.0},
                          {"mean_iterations_with", mean(iw)}}
                         .dump(2);
  return out;
}

ExperimentOutput exp_repeater_count(const Config& cfg, int trials) {
  Table per{"repeater_count_trials", {"num_repeaters", "trial", "sum_rate", "sum_capacity"}, {}};
  Table avg{"repeater_count_mean", {"num_repeaters", "sum_rate", "sum_capacity"}, {}};
  json summ = json::array();
  for (int n : cfg.experiment.repeater_counts) {
    Config c = cfg;
    c.scenario.num_repeaters = n;
    const auto res = parallel_map(trials, [&](int t) {
      return optimize(c, make_trial(c, static_cast<std::uint64_t>(t)).cs);
    });
    std::vector<double> r, cap;
    for (int t = 0; t < trials; ++t) {
      per.add({static_cast<double>(n), static_cast<double>(t), res[t].sum_rate, res[t].sum_capacity});
      r.push_back(res[t].sum_rate);
      cap.push_back(res[t].sum_capacity);
    }
    avg.add({static_cast<double>(n), mean(r), mean(cap)});
    summ.push_back({{"num_repeaters", n}, {"sum_rate", mean(r)}, {"sum_capacity", mean(cap)}});
  }
  ExperimentOutput out;
  out.tables = {std::move(avg), std::move(per)};
  out.summary_json = summ.dump(2);
  return out;
}

ExperimentOutput exp_rate_cdf(const Config& cfg, int trials) {
  const auto res = parallel_map(trials, [&](int t) { return optimize_pair(cfg, t); });
  Table t{"rate_cdf", {"trial", "user", "rate_with", "rate_without", "rho_with_w", "rho_without_w"}, {}};
  const double p_max = cfg.scenario.p_max_w();
  std::size_t zero_with = 0, zero_without = 0, users = 0;
  for (int i = 0; i < trials; ++i) {
    const auto& a = res[i].with;
    const auto& b = res[i].without;
    for (Eigen::Index k = 0; k < a.user_rates.size(); ++k) {
      t.add({static_cast<double>(i), static_cast<double>(k), a.user_rates(k), b.user_rates(k), a.state.rho(k),
             b.state.rho(k)});
      zero_with += a.state.rho(k) <= 1e-6 * p_max;
      zero_without += b.state.rho(k) <= 1e-6 * p_max;
      ++users;
    }
  }
  ExperimentOutput out;
  out.tables.push_back(std::move(t));
  const double u = users ? static_cast<double>(users) : 1.0;
  out.summary_json = json{{"users", users},
                          {"zero_power_fraction_with", zero_with / u},
                          {"zero_power_fraction_without", zero_without / u}}
                         .dump(2);
  return out;
}

ExperimentOutput exp_eta_sweep(const Config& cfg, int trials) {
  Table per{"eta_sweep_trials", {"eta", "trial", "sum_rate", "gershgorin_d"}, {}};
  Table avg{"eta_sweep_mean", {"eta", "sum_rate"}, {}};
  json summ = json::array();
  for (double eta : cfg.experiment.etas) {
    Config c = cfg;
    c.scenario.eta = eta;
    const auto res = parallel_map(trials, [&](int t) {
      return optimize(c, make_trial(c, static_cast<std::uint64_t>(t)).cs);
    });
    std::vector<double> r;
    for (int t = 0; t < trials; ++t) {
      per.add({eta, static_cast<double>(t), res[t].sum_rate, res[t].stability.d});
      r.push_back(res[t].sum_rate);
    }
    avg.add({eta, mean(r)});
    summ.push_back({{"eta", eta}, {"sum_rate", mean(r)}});
  }
  ExperimentOutput out;
  out.tables = {std::move(avg), std::move(per)};
  out.summary_json = summ.dump(2);
  return out;
}

ExperimentOutput exp_circle_nyquist(const Config& cfg) {
  const auto& p = cfg.experiment.circle;
  const SweepGrid grid{p.center_hz, p.span_hz, p.step_hz};
  const HrModel hr = HrModel::free_space(place_repeaters_circle(p.n, p.radius_m));
  const double ag = alpha_g(hr, grid);

  std::vector<double> offsets = p.offsets_db;
  std::sort(offsets.begin(), offsets.end());
  std::vector<double> alphas;
  for (double o : offsets) alphas.push_back(ag * db_to_amplitude(o));
  const auto margin = margin_sweep(hr, alphas, grid);

  RepeaterConfig rc{RVec::Constant(p.n, ag), RVec::Zero(p.n)};
  NyquistOptions no;
  no.keep_samples = true;
  const NyquistResult ny = nyquist_sweep(hr, rc, grid, no);

  ExperimentOutput out;
  Table m{"circle_margin", {"alpha_db", "offset_db", "min_abs_det"}, {}};
  double at_ag = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    m.add({amplitude_to_db(margin[i].first), offsets[i], margin[i].second});
    if (offsets[i] == 0.0) at_ag = margin[i].second;
  }
  Table img{"circle_nyquist_image", {"freq_hz", "det_re", "det_im"}, {}};
  for (std::size_t i = 0; i < ny.det.size(); i += static_cast<std::size_t>(p.image_decimation))
    img.add({ny.freq_hz[i], ny.det[i].real(), ny.det[i].imag()});
  out.tables = {std::move(m), std::move(img)};
  out.summary_json = json{{"alpha_g_db", amplitude_to_db(ag)},
                          {"min_abs_det_at_alpha_g", ny.min_abs_det},
                          {"margin_at_offset_0", at_ag},
                          {"winding_at_alpha_g", ny.winding_number},
                          {"marginal", ny.min_abs_det < kMarginalDet}}
                         .dump(2);
  return out;
}

Table matrix_table(const std::string& name, const CMat& a) {
  Table t{name, {"row", "col", "re", "im"}, {}};
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      t.add({static_cast<double>(i), static_cast<double>(j), a(i, j).real(), a(i, j).imag()});
  return t;
}

ExperimentOutput exp_dump(const Config& cfg) {
  const TrialSystem ts = make_trial(cfg, 0);
  ExperimentOutput out;
  out.tables.push_back(matrix_table("hd", ts.cs.hd));
  out.tables.push_back(matrix_table("hu", ts.cs.hu));
  out.tables.push_back(matrix_table("hb", ts.cs.hb));
  out.tables.push_back(matrix_table("hr", ts.cs.hr));
  Table l{"layout", {"kind", "index", "x_m", "y_m", "z_m"}, {}};
  l.add({0.0, 0.0, ts.layout.bs_pos.x(), ts.layout.bs_pos.y(), ts.layout.bs_pos.z()});
  for (std::size_t i = 0; i < ts.layout.user_pos.size(); ++i) {
    const auto& q = ts.layout.user_pos[i];
    l.add({1.0, static_cast<double>(i), q.x(), q.y(), q.z()});
  }
  for (std::size_t i = 0; i < ts.layout.rep_pos.size(); ++i) {
    const auto& q = ts.layout.rep_pos[i];
    l.add({2.0, static_cast<double>(i), q.x(), q.y(), q.z()});
  }
  out.tables.push_back(std::move(l));
  out.summary_json = json{{"M", ts.cs.m()}, {"K", ts.cs.k()}, {"N", ts.cs.n()}, {"freq_hz", ts.cs.freq_hz}}.dump(2);
  return out;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"motivating",  "placement", "convergence",    "repeater-count",
                                              "rate-cdf",    "eta-sweep", "circle-nyquist", "dump"};
  return names;
}

ExperimentOutput run_experiment(const std::string& name, const Config& cfg_in, std::uint64_t seed, int trials) {
  require(trials >= 1, "run_experiment: trials must be >= 1");
  const Config cfg = with_seed(cfg_in, seed);
  ExperimentOutput out;
  if (name == "motivating") out = exp_motivating(cfg, trials);
  else if (name == "placement") out = exp_placement(cfg);
  else if (name == "convergence") out = exp_convergence(cfg, trials);
  else if (name == "repeater-count") out = exp_repeater_count(cfg, trials);
  else if (name == "rate-cdf") out = exp_rate_cdf(cfg, trials);
  else if (name == "eta-sweep") out = exp_eta_sweep(cfg, trials);
  else if (name == "circle-nyquist") out = exp_circle_nyquist(cfg);
  else if (name == "dump") out = exp_dump(cfg);
  else raise(ErrorCode::InvalidArgument, "unknown experiment '" + name + "'");
  out.name = name;
  return out;
}

void write_outputs(const ExperimentOutput& out, const std::string& dir, const Config& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) raise(ErrorCode::IoError, "cannot create output directory '" + dir + "': " + ec.message());
  for (const auto& t : out.tables) write_csv((std::filesystem::path(dir) / (t.name + ".csv")).string(), t);
  write_text((std::filesystem::path(dir) / "summary.json").string(), out.summary_json + "\n");
  write_text((std::filesystem::path(dir) / "config.json").string(), config_to_json(cfg));
}

TrialSystem make_trial(const Config& cfg, std::uint64_t trial) {
  TrialSystem ts;
  ts.layout = make_layout(cfg.scenario, trial);
  ChannelOptions co;
  co.trial = trial;
  ts.cs = build_channels(cfg.scenario, ts.layout, make_pathloss(cfg.pathloss, cfg.scenario), co);
  return ts;
}

ChannelSet without_repeaters(const ChannelSet& cs) {
  ChannelSet out;
  out.hd = cs.hd;
  out.hu = CMat(0, cs.k());
  out.hb = CMat(cs.m(), 0);
  out.hr = CMat(0, 0);
  out.hr_delay_s = RMat(0, 0);
  out.rep_delays_s = RVec(0);
  out.freq_hz = cs.freq_hz;
  return out;
}

TrialResult optimize(const Config& cfg, const ChannelSet& cs) {
  const OptConfig oc = cfg.opt_config();
  const OptLimits lim = OptLimits::from(cfg.scenario);
  TrialResult r;
  r.state = run(cs, oc, lim, initialize(cs, oc, lim));
  const UplinkSystem sys = optimizer_system(cs, r.state.alpha, lim.noise);
  r.user_rates = user_rates(sys, r.state.rho, oc.base);
  r.sum_rate = r.user_rates.sum();
  r.sum_capacity = sum_capacity(sys, lim.p_max_w, oc.base);
  if (cs.n() > 0) r.stability = certify(HrModel::flat(cs), make_config(cs, r.state.alpha), cfg.check_grid(), oc.eta);
  return r;
}

double placement_alpha(double beta_u, double beta_d, double sigma_r2, double sigma_b2, double p_max,
                       double p_max_rep, double a_max) {
  // beta_u / sR2 >= beta_d / sB2, written without dividing by a zero noise.
  if (beta_u * sigma_b2 < beta_d * sigma_r2) return 0.0;
  return std::min(a_max, std::sqrt(p_max_rep / (p_max * beta_u + sigma_r2)));
}

std::vector<double> moving_average(const std::vector<double>& v, int half_window) {
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_window);
    const int hi = std::min(n - 1, i + half_window);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s / (hi - lo + 1);
  }
  return out;
}

}  // namespace rswarm
