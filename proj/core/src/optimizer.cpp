#include "rswarm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rswarm/error.hpp"
#include "rswarm/stability.hpp"

namespace rswarm {

void validate(const OptConfig& cfg) {
  require(cfg.eta > 0.0 && cfg.eta <= 1.0, "optimizer: eta must lie in (0, 1]");
  require(cfg.i_max >= 1, "optimizer: i_max must be >= 1");
  require(cfg.eps >= 0.0, "optimizer: eps must be >= 0");
  require((cfg.gamma.array() >= 0.0).all(), "optimizer: weights must be >= 0");
}

OptLimits OptLimits::from(const Scenario& s) {
  OptLimits l;
  l.p_max_w = s.p_max_w();
  l.p_max_rep_w = s.p_max_rep_w();
  l.a_max = s.a_max_linear();
  l.noise = noise_power(s);
  return l;
}

UplinkSystem optimizer_system(const ChannelSet& cs, const RVec& alpha, const NoisePowers& noise) {
  return assemble(cs, make_config(cs, alpha), noise, false);
}

CMat update_combiners(const UplinkSystem& sys, const OptState& st) { return mmse_combiners(sys, st.rho); }

RVec update_weights(const UplinkSystem& sys, const OptState& st, int* clamps) {
  RVec w(sys.k());
  for (int k = 0; k < sys.k(); ++k) {
    double xi = 1.0 - std::sqrt(st.rho(k)) * std::real(sys.h.col(k).dot(st.combiners.col(k)));
    if (xi <= 1e-12) {
      xi = 1e-12;
      if (clamps) ++*clamps;
    }
    w(k) = 1.0 / xi;
  }
  return w;
}

RVec update_powers(const UplinkSystem& sys, const OptState& st, const RVec& gamma, double p_max) {
  const int kk = sys.k();
  // cross(j, k) = |c_j^H h_k|^2
  const CMat ch = st.combiners.adjoint() * sys.h;
  RVec rho(kk);
  for (int k = 0; k < kk; ++k) {
    const double num = gamma(k) * st.varpi(k) * std::real(ch(k, k));
    double den = 0.0;
    for (int j = 0; j < kk; ++j) den += gamma(j) * st.varpi(j) * std::norm(ch(j, k));
    if (num <= 0.0 || den <= 0.0) {
      rho(k) = num > 0.0 ? p_max : 0.0;
      continue;
    }
    const double r = num / den;
    rho(k) = std::min(p_max, r * r);
  }
  return rho;
}

RVec c5_caps(const ChannelSet& cs, const RVec& rho, const OptLimits& lim) {
  RVec cap(cs.n());
  for (int n = 0; n < cs.n(); ++n) {
    double in = lim.noise.rep_w;
    for (int k = 0; k < cs.k(); ++k) in += rho(k) * std::norm(cs.hu(n, k));
    cap(n) = in > 0.0 ? std::sqrt(lim.p_max_rep_w / in) : std::numeric_limits<double>::infinity();
  }
  return cap;
}

RVec hr_row_sums(const ChannelSet& cs) { return cs.hr.cwiseAbs().rowwise().sum(); }

namespace {

RVec gain_upper(const ChannelSet& cs, const RVec& rho, const OptConfig& cfg, const OptLimits& lim) {
  RVec up = RVec::Constant(cs.n(), lim.a_max);
  if (cfg.c3 == C3Variant::First) {
    const RVec s = hr_row_sums(cs);
    for (int n = 0; n < cs.n(); ++n)
      if (s(n) > 0.0) up(n) = std::min(up(n), cfg.eta / s(n));
  }
  if (cfg.enforce_c5) up = up.cwiseMin(c5_caps(cs, rho, lim));
  return up;
}

RVec weights_or_ones(const RVec& gamma, int k) {
  if (gamma.size() == 0) return RVec::Ones(k);
  require(gamma.size() == k, "optimizer: gamma must have K entries");
  return gamma;
}

}  // namespace

QpProblem build_alpha_qp(const ChannelSet& cs, const OptState& st, const RVec& gamma, const OptConfig& cfg,
                         const OptLimits& lim) {
  const int n = cs.n();
  const int kk = cs.k();
  require(n >= 1, "build_alpha_qp: needs at least one repeater");
  const RVec g = weights_or_ones(gamma, kk);
  const CMat hbt = phase_absorbed_hb(cs, make_config(cs, RVec::Zero(n)));

  // Shared terms: HU D_rho HU^H + sR2 I and HU D_rho HD^H.
  const CVec rho_c = st.rho.cast<cplx>();
  CMat uu = cs.hu * rho_c.asDiagonal() * cs.hu.adjoint();
  uu.diagonal().array() += lim.noise.rep_w;
  const CMat ud = cs.hu * rho_c.asDiagonal() * cs.hd.adjoint();

  QpProblem p;
  p.q = RMat::Zero(n, n);
  p.c = RVec::Zero(n);
  for (int k = 0; k < kk; ++k) {
    const double w = g(k) * st.varpi(k);
    if (w == 0.0) continue;
    const CVec ck = st.combiners.col(k);
    const CVec phi = hbt.adjoint() * ck;
    // Re{D_phi^H A D_phi}_{ij} = Re{conj(phi_i) A_ij phi_j}
    const CMat gk = phi.conjugate().asDiagonal() * uu * phi.asDiagonal();
    p.q += w * gk.real();
    const CVec v = ud * ck - std::sqrt(st.rho(k)) * cs.hu.col(k);
    p.c += w * (phi.conjugate().asDiagonal() * v).real();
  }
  p.q = 0.5 * (p.q + p.q.transpose()).eval();
  p.lower = RVec::Zero(n);
  p.upper = gain_upper(cs, st.rho, cfg, lim);
  if (cfg.c3 == C3Variant::Second) {
    p.ineq_a = cs.hr.cwiseAbs();
    p.ineq_b = RVec::Constant(n, cfg.eta);
  } else {
    p.ineq_a = RMat(0, n);
    p.ineq_b = RVec(0);
  }
  return p;
}

OptState initialize(const ChannelSet& cs, const OptConfig& cfg, const OptLimits& lim) {
  validate(cfg);
  OptState st;
  const int kk = cs.k();
  const int n = cs.n();
  st.rho = RVec::Constant(kk, lim.p_max_w);
  st.varpi = RVec::Ones(kk);
  st.combiners = CMat::Zero(cs.m(), kk);
  const double ag = alpha_g(cs.hr.cwiseAbs());
  const double common = 0.5 * std::min(lim.a_max, cfg.eta * ag);
  st.alpha = RVec::Constant(n, common);
  if (cfg.enforce_c5 && n > 0) st.alpha = st.alpha.cwiseMin(c5_caps(cs, st.rho, lim));
  return st;
}

double constraint_violation(const ChannelSet& cs, const OptState& st, const OptConfig& cfg,
                            const OptLimits& lim) {
  double v = 0.0;
  for (int k = 0; k < st.rho.size(); ++k)
    v = std::max({v, -st.rho(k), st.rho(k) - lim.p_max_w});
  const RMat a = cs.hr.cwiseAbs();
  for (int n = 0; n < st.alpha.size(); ++n) v = std::max({v, -st.alpha(n), st.alpha(n) - lim.a_max});
  if (cs.n() > 0) {
    const GershgorinMetrics gm = gershgorin_metrics(a, st.alpha);
    v = std::max(v, (cfg.c3 == C3Variant::First ? gm.d1 : gm.d2) - cfg.eta);
    if (cfg.enforce_c5) {
      const RVec cap = c5_caps(cs, st.rho, lim);
      for (int n = 0; n < cs.n(); ++n) v = std::max(v, st.alpha(n) - cap(n));
    }
  }
  return v;
}

namespace {

// Pulls a QP solution exactly onto the feasible set (the solver meets the
// constraints to its tolerance only).
RVec polish(RVec alpha, const QpProblem& p, const OptConfig& cfg) {
  alpha = alpha.cwiseMax(p.lower).cwiseMin(p.upper);
  if (cfg.c3 == C3Variant::Second) {
    const double worst = (p.ineq_a * alpha).maxCoeff();
    if (worst > cfg.eta) alpha *= cfg.eta / worst;
  }
  return alpha;
}

}  // namespace

OptState run(const ChannelSet& cs, const OptConfig& cfg, const OptLimits& lim, OptState st) {
  validate(cfg);
  const int kk = cs.k();
  const RVec gamma = weights_or_ones(cfg.gamma, kk);
  require(st.rho.size() == kk && st.alpha.size() == cs.n(), "run: initial state has wrong sizes");

  UplinkSystem sys = optimizer_system(cs, st.alpha, lim.noise);
  st.initial_rate = weighted_sum_rate(sys, st.rho, gamma, cfg.base);
  st.trace.clear();
  st.iter = 0;
  double prev = st.initial_rate;

  for (int it = 1; it <= cfg.i_max; ++it) {
    st.combiners = update_combiners(sys, st);
    st.varpi = update_weights(sys, st, &st.degenerate_mse_clamps);
    st.rho = update_powers(sys, st, gamma, lim.p_max_w);
    if (cs.n() > 0) {
      const QpProblem qp = build_alpha_qp(cs, st, gamma, cfg, lim);
      st.alpha = polish(solve_qp(qp, cfg.qp).x, qp, cfg);
    }
    sys = optimizer_system(cs, st.alpha, lim.noise);
    const double rate = weighted_sum_rate(sys, st.rho, gamma, cfg.base);
    st.trace.push_back(rate);
    st.iter = it;
    if (std::abs(rate - prev) <= cfg.eps) break;
    prev = rate;
  }
  return st;
}

OptState run(const ChannelSet& cs, const Scenario& s, const OptConfig& cfg, OptState init) {
  return run(cs, cfg, OptLimits::from(s), std::move(init));
}

}  // namespace rswarm
