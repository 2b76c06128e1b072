#include "rswarm/channel.hpp"

#include <cmath>

#include "rswarm/error.hpp"
#include "rswarm/rng.hpp"

namespace rswarm {

RepeaterConfig make_config(const ChannelSet& cs, const RVec& alpha) {
  require(alpha.size() == cs.n(), "make_config: alpha must have N entries");
  RepeaterConfig cfg;
  cfg.alpha = alpha;
  cfg.nu_s = cs.rep_delays_s.size() == cs.n() ? cs.rep_delays_s : RVec::Zero(cs.n());
  return cfg;
}

void validate(const RepeaterConfig& cfg, int n, double a_max) {
  require(cfg.alpha.size() == n && cfg.nu_s.size() == n, "repeater config: size mismatch");
  for (int i = 0; i < n; ++i) {
    require(std::isfinite(cfg.alpha(i)) && cfg.alpha(i) >= 0.0, "repeater config: alpha must be >= 0");
    require(std::isfinite(cfg.nu_s(i)) && cfg.nu_s(i) >= 0.0, "repeater config: nu must be >= 0");
    require(cfg.alpha(i) <= a_max * (1.0 + 1e-12), "repeater config: alpha exceeds A_max");
  }
}

namespace {

std::uint64_t substream(std::uint64_t trial, LinkClass c) {
  return trial * kNumLinkClasses + static_cast<std::uint64_t>(c);
}

struct ClassRngs {
  CounterRng los;
  CounterRng shadow;
  CounterRng fading;

  ClassRngs(std::uint64_t seed, std::uint64_t sub)
      : los(seed, Stream::LineOfSight, sub),
        shadow(seed, Stream::Shadowing, sub),
        fading(seed, Stream::Fading, sub) {}

  LinkRngs ptrs() { return {&los, &shadow, &fading}; }
};

// Column of a link between a single-antenna node and the BS array.
void fill_bs_column(CMat& out, Eigen::Index col, const PathlossModel& model, LinkClass c,
                    const Point3& node, const std::vector<Point3>& elements, const Point3& bs_center,
                    double omega, bool force_los, ClassRngs& rng) {
  const LinkDraw d = draw_link(model, c, node, bs_center, omega / (2.0 * kPi), force_los, rng.ptrs());
  const double amp = std::sqrt(d.beta);
  for (std::size_t m = 0; m < elements.size(); ++m) {
    if (d.los) {
      const double dist = std::max((node - elements[m]).norm(), model.min_distance_m);
      out(static_cast<Eigen::Index>(m), col) = amp * std::polar(1.0, -omega * dist / kSpeedOfLight);
    } else {
      out(static_cast<Eigen::Index>(m), col) = amp * rng.fading.complex_normal();
    }
  }
}

}  // namespace

ChannelSet build_channels(const Scenario& s, const Layout& l, const PathlossModel& model,
                          const ChannelOptions& opt) {
  validate(s);
  const int m = s.num_bs_antennas;
  const int k = static_cast<int>(l.user_pos.size());
  const int n = static_cast<int>(l.rep_pos.size());
  require(k == s.num_users, "build_channels: layout user count differs from scenario");
  require(n == s.num_repeaters, "build_channels: layout repeater count differs from scenario");
  const double omega = s.omega();

  std::vector<Point3> elements;
  const double spacing = s.bs_element_spacing_wl * s.wavelength_m();
  for (int i = 0; i < m; ++i)
    elements.push_back(l.bs_pos + Point3((i - 0.5 * (m - 1)) * spacing, 0.0, 0.0));

  ChannelSet cs;
  cs.freq_hz = s.carrier_hz;
  cs.hd = CMat::Zero(m, k);
  cs.hu = CMat::Zero(n, k);
  cs.hb = CMat::Zero(m, n);
  cs.hr = CMat::Zero(n, n);
  cs.hr_delay_s = RMat::Zero(n, n);
  cs.rep_delays_s = RVec::Zero(n);

  {
    ClassRngs rng(s.seed, substream(opt.trial, LinkClass::Direct));
    for (int j = 0; j < k; ++j)
      fill_bs_column(cs.hd, j, model, LinkClass::Direct, l.user_pos[j], elements, l.bs_pos, omega, false, rng);
  }
  {
    ClassRngs rng(s.seed, substream(opt.trial, LinkClass::RepeaterBs));
    for (int j = 0; j < n; ++j)
      fill_bs_column(cs.hb, j, model, LinkClass::RepeaterBs, l.rep_pos[j], elements, l.bs_pos, omega,
                     s.los_r2b_forced, rng);
  }
  {
    ClassRngs rng(s.seed, substream(opt.trial, LinkClass::UserRepeater));
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i)
        cs.hu(i, j) = link_gain(model, LinkClass::UserRepeater, l.user_pos[j], l.rep_pos[i], omega,
                                false, rng.ptrs()).h;
  }
  {
    ClassRngs rng(s.seed, substream(opt.trial, LinkClass::RepeaterRepeater));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const cplx h = link_gain(model, LinkClass::RepeaterRepeater, l.rep_pos[i], l.rep_pos[j], omega,
                                 false, rng.ptrs()).h;
        cs.hr(i, j) = h;
        cs.hr(j, i) = h;
        const double tau = std::max((l.rep_pos[i] - l.rep_pos[j]).norm(), model.min_distance_m) / kSpeedOfLight;
        cs.hr_delay_s(i, j) = tau;
        cs.hr_delay_s(j, i) = tau;
      }
      cs.hr(i, i) = opt.self_interference_amp;
    }
  }
  require_finite(cs.hd, "build_channels: HD");
  require_finite(cs.hu, "build_channels: HU");
  require_finite(cs.hb, "build_channels: HB");
  require_finite(cs.hr, "build_channels: HR");
  return cs;
}

CMat free_space_hr(const std::vector<Point3>& pos, double omega) {
  const auto n = static_cast<Eigen::Index>(pos.size());
  CMat hr = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = std::max((pos[i] - pos[j]).norm(), 1.0);
      const cplx h = (kSpeedOfLight / (2.0 * omega * d)) * std::polar(1.0, -omega * d / kSpeedOfLight);
      hr(i, j) = h;
      hr(j, i) = h;
    }
  return hr;
}

CVec repeater_response(const RepeaterConfig& cfg, double omega) {
  require(cfg.alpha.size() == cfg.nu_s.size(), "repeater_response: alpha/nu size mismatch");
  CVec a(cfg.alpha.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = cfg.alpha(i) * std::polar(1.0, -omega * cfg.nu_s(i));
  return a;
}

CMat effective_G(const CMat& hr, const RepeaterConfig& cfg, double omega) {
  const auto n = hr.rows();
  require(hr.cols() == n && cfg.alpha.size() == n, "effective_G: size mismatch");
  if (n == 0) return CMat(0, 0);
  const CVec a = repeater_response(cfg, omega);
  const CMat lhs = CMat::Identity(n, n) - a.asDiagonal() * hr;
  return cmat_inverse(lhs) * a.asDiagonal();
}

CMat effective_G(const ChannelSet& cs, const RepeaterConfig& cfg) {
  return effective_G(cs.hr, cfg, 2.0 * kPi * cs.freq_hz);
}

double self_interference_gain(double alpha, double beta_loop) {
  require(alpha >= 0.0 && beta_loop >= 0.0, "self_interference_gain: arguments must be >= 0");
  if (alpha * beta_loop >= 1.0)
    raise(ErrorCode::DivergentLoop, "self_interference_gain: alpha * beta >= 1");
  return alpha / (1.0 - alpha * beta_loop);
}

CMat phase_absorbed_hb(const ChannelSet& cs, const RepeaterConfig& cfg) {
  require(cfg.nu_s.size() == cs.n(), "phase_absorbed_hb: size mismatch");
  const double omega = 2.0 * kPi * cs.freq_hz;
  CMat out = cs.hb;
  for (int i = 0; i < cs.n(); ++i) out.col(i) *= std::polar(1.0, -omega * cfg.nu_s(i));
  return out;
}

}  // namespace rswarm
