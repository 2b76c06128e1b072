#include "rswarm/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rswarm/error.hpp"

namespace rswarm {

std::size_t SweepGrid::size() const {
  return static_cast<std::size_t>(std::floor(span_hz / step_hz + 1e-9)) + 1;
}

double SweepGrid::freq(std::size_t i) const {
  return center_hz - 0.5 * span_hz + static_cast<double>(i) * step_hz;
}

double SweepGrid::omega(std::size_t i) const { return 2.0 * kPi * freq(i); }

void validate(const SweepGrid& g) {
  require(g.step_hz > 0.0 && std::isfinite(g.step_hz), "sweep grid: step must be positive");
  require(g.span_hz >= g.step_hz, "sweep grid: span must be >= step");
  require(g.center_hz - 0.5 * g.span_hz > 0.0, "sweep grid: band must lie at positive frequencies");
}

HrModel HrModel::flat(const CMat& hr_center, const RMat& delay_s, double center_hz) {
  require(hr_center.rows() == hr_center.cols(), "HrModel: HR must be square");
  require(delay_s.rows() == hr_center.rows() && delay_s.cols() == hr_center.cols(),
          "HrModel: delay matrix size mismatch");
  HrModel m;
  m.kind_ = Kind::Flat;
  m.amp_ = hr_center.cwiseAbs();
  m.phase0_ = hr_center.unaryExpr([](const cplx& z) { return std::arg(z); }).real();
  m.delay_ = delay_s;
  m.omega0_ = 2.0 * kPi * center_hz;
  return m;
}

HrModel HrModel::flat(const ChannelSet& cs) { return flat(cs.hr, cs.hr_delay_s, cs.freq_hz); }

HrModel HrModel::free_space(std::vector<Point3> pos) {
  HrModel m;
  m.kind_ = Kind::FreeSpace;
  m.pos_ = std::move(pos);
  return m;
}

int HrModel::n() const {
  return kind_ == Kind::Flat ? static_cast<int>(amp_.rows()) : static_cast<int>(pos_.size());
}

CMat HrModel::at(double omega) const {
  if (kind_ == Kind::FreeSpace) return free_space_hr(pos_, omega);
  const auto n = amp_.rows();
  CMat out(n, n);
  const double dw = omega - omega0_;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, j) = amp_(i, j) == 0.0 ? cplx(0.0, 0.0)
                                    : std::polar(amp_(i, j), phase0_(i, j) - dw * delay_(i, j));
  return out;
}

RMat HrModel::abs_at(double omega) const {
  if (kind_ == Kind::Flat) return amp_;
  return free_space_hr(pos_, omega).cwiseAbs();
}

GershgorinMetrics gershgorin_metrics(const RMat& abs_hr, const RVec& alpha) {
  require(abs_hr.rows() == alpha.size() && abs_hr.cols() == alpha.size(),
          "gershgorin_metrics: size mismatch");
  GershgorinMetrics g;
  if (alpha.size() == 0) return g;
  g.d1 = (alpha.array() * abs_hr.rowwise().sum().array()).maxCoeff();
  g.d2 = (abs_hr * alpha).maxCoeff();
  g.d = std::min(g.d1, g.d2);
  return g;
}

GershgorinMetrics gershgorin_metrics(const HrModel& hr, const RVec& alpha, const SweepGrid& grid) {
  validate(grid);
  if (hr.amplitude_flat()) return gershgorin_metrics(hr.abs_at(2.0 * kPi * grid.center_hz), alpha);
  GershgorinMetrics sup;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GershgorinMetrics g = gershgorin_metrics(hr.abs_at(grid.omega(i)), alpha);
    sup.d1 = std::max(sup.d1, g.d1);
    sup.d2 = std::max(sup.d2, g.d2);
  }
  sup.d = std::min(sup.d1, sup.d2);
  return sup;
}

double alpha_g(const RMat& abs_hr) {
  if (abs_hr.size() == 0) return std::numeric_limits<double>::infinity();
  const double max_row = abs_hr.rowwise().sum().maxCoeff();
  if (max_row <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / max_row;
}

double alpha_g(const HrModel& hr, const SweepGrid& grid) {
  validate(grid);
  if (hr.amplitude_flat()) return alpha_g(hr.abs_at(2.0 * kPi * grid.center_hz));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) best = std::min(best, alpha_g(hr.abs_at(grid.omega(i))));
  return best;
}

namespace {

double wrapped(double d) {
  while (d > kPi) d -= 2.0 * kPi;
  while (d <= -kPi) d += 2.0 * kPi;
  return d;
}

// Accumulates the phase of a sampled curve, refining any interval whose
// increment exceeds pi/2 once before giving up.
class PhaseAccumulator {
 public:
  PhaseAccumulator(int refine_factor) : refine_(refine_factor) {}

  template <class Eval>
  void step(cplx prev, double s_prev, cplx next, double s_next, Eval&& eval) {
    double inc = wrapped(std::arg(next) - std::arg(prev));
    if (std::abs(inc) > 0.5 * kPi) {
      ++refined_;
      inc = 0.0;
      cplx a = prev;
      for (int r = 1; r <= refine_; ++r) {
        const cplx b = r == refine_ ? next : eval(s_prev + (s_next - s_prev) * r / refine_);
        const double sub = wrapped(std::arg(b) - std::arg(a));
        if (std::abs(sub) > 0.5 * kPi)
          raise(ErrorCode::GridTooCoarse, "nyquist_sweep: phase increment above pi/2 after refinement");
        inc += sub;
        a = b;
      }
    }
    total_ += inc;
  }

  double total() const { return total_; }
  std::size_t refined() const { return refined_; }

 private:
  int refine_;
  double total_ = 0.0;
  std::size_t refined_ = 0;
};

}  // namespace

NyquistResult nyquist_sweep(const HrModel& hr, const RepeaterConfig& cfg, const SweepGrid& grid,
                            const NyquistOptions& opt) {
  validate(grid);
  const int n = hr.n();
  validate(cfg, n);
  require(opt.refine_factor >= 2 && opt.closure_steps >= 1, "nyquist_sweep: bad options");

  NyquistResult res;
  res.min_abs_det = std::numeric_limits<double>::infinity();
  if (n == 0) {
    res.min_abs_det = 1.0;
    return res;
  }

  auto det_at = [&](double omega, double t) {
    const CVec a = repeater_response(cfg, omega);
    CMat x = -t * (a.asDiagonal() * hr.at(omega));
    x.diagonal().array() += 1.0;
    return cmat_det(std::move(x));
  };

  PhaseAccumulator acc(opt.refine_factor);
  const std::size_t count = grid.size();
  const double w_first = grid.omega(0);
  const double w_last = grid.omega(count - 1);

  // Taper in: t = 0 -> 1 at the lower band edge.
  cplx prev = 1.0;
  double t_prev = 0.0;
  for (int s = 1; s <= opt.closure_steps; ++s) {
    const double t = static_cast<double>(s) / opt.closure_steps;
    const cplx cur = det_at(w_first, t);
    acc.step(prev, t_prev, cur, t, [&](double tt) { return det_at(w_first, tt); });
    prev = cur;
    t_prev = t;
  }

  if (opt.keep_samples) {
    res.freq_hz.reserve(count);
    res.det.reserve(count);
  }
  double w_prev = w_first;
  for (std::size_t i = 0; i < count; ++i) {
    const double w = grid.omega(i);
    const cplx cur = i == 0 ? prev : det_at(w, 1.0);
    if (i > 0) acc.step(prev, w_prev, cur, w, [&](double ww) { return det_at(ww, 1.0); });
    res.min_abs_det = std::min(res.min_abs_det, std::abs(cur));
    if (opt.keep_samples) {
      res.freq_hz.push_back(grid.freq(i));
      res.det.push_back(cur);
    }
    prev = cur;
    w_prev = w;
  }

  // Taper out: t = 1 -> 0 at the upper band edge.
  t_prev = 1.0;
  for (int s = opt.closure_steps - 1; s >= 0; --s) {
    const double t = static_cast<double>(s) / opt.closure_steps;
    const cplx cur = s == 0 ? cplx(1.0, 0.0) : det_at(w_last, t);
    acc.step(prev, t_prev, cur, t, [&](double tt) { return det_at(w_last, tt); });
    prev = cur;
    t_prev = t;
  }

  res.winding_number = static_cast<int>(std::lround(acc.total() / (2.0 * kPi)));
  res.refined_intervals = acc.refined();
  return res;
}

cplx circle_det_closed_form(int n, const RVec& beta, const RVec& tau, double alpha, double nu, double omega) {
  require(n >= 3 && n % 2 == 1, "circle_det_closed_form: n must be odd and >= 3");
  const int n0 = (n - 1) / 2;
  require(beta.size() == n0 && tau.size() == n0, "circle_det_closed_form: need (n-1)/2 chord terms");
  cplx det = 1.0;
  for (int row = 0; row < n; ++row) {
    cplx sum = 0.0;
    for (int i = 1; i <= n0; ++i)
      sum += std::sqrt(beta(i - 1)) * std::cos(2.0 * kPi * i * row / n) *
             std::polar(1.0, -omega * (tau(i - 1) + nu));
    det *= 1.0 - 2.0 * alpha * sum;
  }
  return det;
}

cplx circle_det_closed_form(int n, double radius_m, double alpha, double nu, double omega) {
  require(n >= 3 && n % 2 == 1, "circle_det_closed_form: n must be odd and >= 3");
  const int n0 = (n - 1) / 2;
  RVec beta(n0);
  RVec tau(n0);
  for (int i = 1; i <= n0; ++i) {
    const double d = 2.0 * radius_m * std::sin(i * kPi / n);
    const double amp = kSpeedOfLight / (2.0 * omega * d);
    beta(i - 1) = amp * amp;
    tau(i - 1) = d / kSpeedOfLight;
  }
  return circle_det_closed_form(n, beta, tau, alpha, nu, omega);
}

std::vector<std::pair<double, double>> two_repeater_impulse_train(double alpha, double beta, double tau,
                                                                  double nu, int n_terms) {
  require(n_terms >= 1, "two_repeater_impulse_train: n_terms must be >= 1");
  require(alpha >= 0.0 && beta >= 0.0 && tau >= 0.0 && nu >= 0.0,
          "two_repeater_impulse_train: arguments must be >= 0");
  const double r = alpha * alpha * beta;
  std::vector<std::pair<double, double>> out;
  double amp = 1.0;
  for (int i = 0; i < n_terms; ++i) {
    out.emplace_back(2.0 * i * (tau + nu), amp);
    amp *= r;
  }
  return out;
}

std::vector<std::pair<double, double>> margin_sweep(const HrModel& hr, const std::vector<double>& alphas,
                                                    const SweepGrid& grid) {
  validate(grid);
  require(std::is_sorted(alphas.begin(), alphas.end()), "margin_sweep: alphas must be ascending");
  std::vector<double> best(alphas.size(), std::numeric_limits<double>::infinity());
  const auto n = hr.n();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CMat h = hr.at(grid.omega(i));
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      CMat x = -alphas[a] * h;
      x.diagonal().array() += 1.0;
      best[a] = std::min(best[a], n == 0 ? 1.0 : std::abs(cmat_det(std::move(x))));
    }
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t a = 0; a < alphas.size(); ++a) out.emplace_back(alphas[a], best[a]);
  return out;
}

StabilityReport certify(const HrModel& hr, const RepeaterConfig& cfg, const SweepGrid& grid,
                        std::optional<double> eta) {
  StabilityReport r;
  const GershgorinMetrics g = gershgorin_metrics(hr, cfg.alpha, grid);
  r.d1 = g.d1;
  r.d2 = g.d2;
  r.d = g.d;
  r.alpha_g = alpha_g(hr, grid);
  const NyquistResult ny = nyquist_sweep(hr, cfg, grid);
  r.min_abs_det = ny.min_abs_det;
  r.winding_number = ny.winding_number;
  r.gershgorin_pass = eta ? r.d <= *eta : r.d < 1.0;
  r.nyquist_pass = r.winding_number == 0 && r.min_abs_det > 0.0;
  r.marginal = r.min_abs_det < kMarginalDet;
  return r;
}

}  // namespace rswarm
