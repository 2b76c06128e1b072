#include "rswarm/uplink.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "rswarm/error.hpp"

namespace rswarm {

double log_in(double x, LogBase base) {
  return base == LogBase::Bits ? std::log2(x) : std::log(x);
}

UplinkSystem assemble(const ChannelSet& cs, const RepeaterConfig& cfg, const NoisePowers& noise,
                      bool use_full_G) {
  require(noise.bs_w > 0.0 && noise.rep_w >= 0.0, "assemble: noise powers must be positive");
  UplinkSystem sys;
  sys.sigma_b2 = noise.bs_w;
  sys.sigma_r2 = noise.rep_w;
  const int m = cs.m();
  sys.h = cs.hd;
  sys.sigma = CMat::Identity(m, m) * noise.bs_w;
  if (cs.n() == 0) return sys;

  validate(cfg, cs.n());
  CMat g;
  if (use_full_G) {
    g = effective_G(cs, cfg);
  } else {
    g = repeater_response(cfg, 2.0 * kPi * cs.freq_hz).asDiagonal();
  }
  const CMat hbg = cs.hb * g;
  sys.h += hbg * cs.hu;
  sys.sigma += noise.rep_w * (hbg * hbg.adjoint());
  sys.sigma = 0.5 * (sys.sigma + sys.sigma.adjoint()).eval();
  return sys;
}

namespace {

Eigen::LLT<CMat> chol(const CMat& a, const char* what) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) raise(ErrorCode::SingularMatrix, std::string(what) + ": not positive definite");
  return llt;
}

// log det(I + p W^H W) for the whitened channel W.
double logdet_whitened(const CMat& w, double p, LogBase base) {
  const auto k = w.cols();
  if (k == 0) return 0.0;
  CMat a = p * (w.adjoint() * w);
  a.diagonal().array() += 1.0;
  a = 0.5 * (a + a.adjoint()).eval();
  const auto llt = chol(a, "sum_capacity");
  double s = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) s += 2.0 * std::log(llt.matrixL()(i, i).real());
  return base == LogBase::Bits ? s / std::log(2.0) : s;
}

CMat whiten(const UplinkSystem& sys) {
  const auto llt = chol(sys.sigma, "noise covariance");
  return llt.matrixL().solve(sys.h);
}

void check_rho(const UplinkSystem& sys, const RVec& rho) {
  require(rho.size() == sys.k(), "uplink: rho must have K entries");
  require((rho.array() >= 0.0).all() && rho.allFinite(), "uplink: rho must be finite and >= 0");
}

}  // namespace

double sum_capacity(const UplinkSystem& sys, double p_max, LogBase base) {
  require(p_max >= 0.0, "sum_capacity: p_max must be >= 0");
  return logdet_whitened(whiten(sys), p_max, base);
}

std::vector<SubsetBound> capacity_region_constraints(const UplinkSystem& sys, double p_max, int k_max,
                                                     LogBase base) {
  const int k = sys.k();
  if (k > k_max) raise(ErrorCode::TooManyUsers, "capacity_region_constraints: K exceeds k_max");
  const CMat w = whiten(sys);
  std::vector<SubsetBound> out;
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    SubsetBound b;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) b.users.push_back(i);
    CMat ws(w.rows(), static_cast<Eigen::Index>(b.users.size()));
    for (std::size_t j = 0; j < b.users.size(); ++j) ws.col(static_cast<Eigen::Index>(j)) = w.col(b.users[j]);
    b.bound = logdet_whitened(ws, p_max, base);
    out.push_back(std::move(b));
  }
  return out;
}

CMat received_covariance(const UplinkSystem& sys, const RVec& rho) {
  check_rho(sys, rho);
  CMat r = sys.h * rho.cast<cplx>().asDiagonal() * sys.h.adjoint() + sys.sigma;
  return 0.5 * (r + r.adjoint());
}

double sinr(const UplinkSystem& sys, const RVec& rho, const CVec& c, int k) {
  check_rho(sys, rho);
  require(k >= 0 && k < sys.k(), "sinr: user index out of range");
  require(c.size() == sys.m(), "sinr: combiner length must be M");
  if (c.squaredNorm() == 0.0) raise(ErrorCode::ZeroCombiner, "sinr: combiner is zero");
  const cplx signal = c.dot(sys.h.col(k));  // c^H h_k
  double interf = std::real(c.dot(sys.sigma * c));
  for (int j = 0; j < sys.k(); ++j) {
    if (j == k) continue;
    interf += rho(j) * std::norm(c.dot(sys.h.col(j)));
  }
  return rho(k) * std::norm(signal) / interf;
}

CMat mmse_combiners(const UplinkSystem& sys, const RVec& rho) {
  const auto llt = chol(received_covariance(sys, rho), "mmse_combiner");
  CMat c = llt.solve(sys.h);
  for (int k = 0; k < sys.k(); ++k) c.col(k) *= std::sqrt(rho(k));
  return c;
}

CVec mmse_combiner(const UplinkSystem& sys, const RVec& rho, int k) {
  require(k >= 0 && k < sys.k(), "mmse_combiner: user index out of range");
  const auto llt = chol(received_covariance(sys, rho), "mmse_combiner");
  return std::sqrt(rho(k)) * llt.solve(sys.h.col(k));
}

double sinr_mmse_closed_form(const UplinkSystem& sys, const RVec& rho, int k) {
  require(k >= 0 && k < sys.k(), "sinr_mmse_closed_form: user index out of range");
  const auto llt = chol(received_covariance(sys, rho), "sinr_mmse_closed_form");
  const CVec x = llt.solve(sys.h.col(k));
  const double q = rho(k) * std::real(sys.h.col(k).dot(x));
  return 1.0 / (1.0 - q) - 1.0;
}

double mse(const UplinkSystem& sys, const RVec& rho, const CVec& c, int k) {
  require(k >= 0 && k < sys.k(), "mse: user index out of range");
  require(c.size() == sys.m(), "mse: combiner length must be M");
  const CMat r = received_covariance(sys, rho);
  return std::real(c.dot(r * c)) - 2.0 * std::sqrt(rho(k)) * std::real(c.dot(sys.h.col(k))) + 1.0;
}

RVec user_rates(const UplinkSystem& sys, const RVec& rho, LogBase base) {
  const CMat c = mmse_combiners(sys, rho);
  RVec out(sys.k());
  for (int k = 0; k < sys.k(); ++k) {
    // 1 + SINR_mmse = 1 / xi_mmse with xi_mmse = 1 - sqrt(rho_k) h_k^H c_k.
    const double xi = 1.0 - std::sqrt(rho(k)) * std::real(sys.h.col(k).dot(c.col(k)));
    out(k) = -log_in(std::max(xi, 1e-300), base);
  }
  return out;
}

double weighted_sum_rate(const UplinkSystem& sys, const RVec& rho, const RVec& gamma, LogBase base) {
  require(gamma.size() == sys.k(), "weighted_sum_rate: gamma must have K entries");
  return gamma.dot(user_rates(sys, rho, base));
}

double blue_variance_toy(double alpha, double sigma2) {
  require(alpha >= 0.0, "blue_variance_toy: alpha must be >= 0");
  const double a2 = alpha * alpha;
  return (1.0 + a2) / (1.0 + 2.0 * a2) * sigma2;
}

}  // namespace rswarm
