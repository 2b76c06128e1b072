#include "rswarm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rswarm/error.hpp"

namespace rswarm {
namespace {

void validate(const QpProblem& p, double tol) {
  const Eigen::Index n = p.c.size();
  require(n > 0, "solve_qp: empty problem");
  require(p.q.rows() == n && p.q.cols() == n, "solve_qp: Q must be N x N");
  require(p.lower.size() == n && p.upper.size() == n, "solve_qp: bound sizes must match N");
  const Eigen::Index rows = p.ineq_b.size();
  require(p.ineq_a.rows() == rows, "solve_qp: ineq_a rows must match ineq_b");
  require(rows == 0 || p.ineq_a.cols() == n, "solve_qp: ineq_a must have N columns");
  require(p.q.allFinite() && p.c.allFinite(), "solve_qp: non-finite objective");
  require(p.lower.allFinite() && p.upper.allFinite(), "solve_qp: bounds must be finite");
  require(rows == 0 || (p.ineq_a.allFinite() && p.ineq_b.allFinite()),
          "solve_qp: non-finite linear constraint");

  const double qmax = p.q.cwiseAbs().maxCoeff();
  const double asym = (p.q - p.q.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10 * qmax, "solve_qp: Q is not symmetric");

  for (Eigen::Index i = 0; i < n; ++i)
    if (p.lower(i) > p.upper(i)) raise(ErrorCode::Infeasible, "solve_qp: lower > upper");

  if (rows > 0) {
    const RVec lhs = p.ineq_a * p.lower;
    const RVec mag = p.ineq_a.cwiseAbs() * p.lower.cwiseAbs();
    for (Eigen::Index j = 0; j < rows; ++j) {
      const double slack = tol * (1.0 + std::abs(p.ineq_b(j)) + mag(j));
      if (lhs(j) > p.ineq_b(j) + slack)
        raise(ErrorCode::Infeasible, "solve_qp: lower bound violates a linear constraint");
    }
  }
}

// Constraints in normalized coordinates y, all of the form a'y <= h.
struct ConstraintSet {
  RMat a;
  RVec h;
};

}  // namespace

QpSolution solve_qp(const QpProblem& p, const QpOptions& opt) {
  validate(p, opt.tol);
  const Eigen::Index n_all = p.size();

  QpSolution out;
  out.x = p.lower;

  // One variable: the clamped stationary point, computed directly.
  if (n_all == 1) {
    double lo = p.lower(0), hi = p.upper(0);
    for (Eigen::Index j = 0; j < p.ineq_b.size(); ++j) {
      const double a = p.ineq_a(j, 0);
      if (a > 0.0) hi = std::min(hi, p.ineq_b(j) / a);
      else if (a < 0.0) lo = std::max(lo, p.ineq_b(j) / a);
    }
    hi = std::max(hi, lo);
    const double q = p.q(0, 0), c = p.c(0);
    if (q > 0.0) out.x(0) = std::clamp(-c / q, lo, hi);
    else out.x(0) = c < 0.0 ? hi : lo;
    return out;
  }

  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < n_all; ++i)
    if (p.upper(i) > p.lower(i)) free_idx.push_back(i);
  const auto n = static_cast<Eigen::Index>(free_idx.size());
  if (n == 0) return out;

  // x_free = lower_free + diag(width) * y, y in [0, 1]^n.
  RVec width(n);
  for (Eigen::Index i = 0; i < n; ++i)
    width(i) = p.upper(free_idx[i]) - p.lower(free_idx[i]);

  const RVec g0 = p.q * p.lower + p.c;
  RMat qs(n, n);
  RVec cs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cs(i) = width(i) * g0(free_idx[i]);
    for (Eigen::Index j = 0; j < n; ++j)
      qs(i, j) = width(i) * p.q(free_idx[i], free_idx[j]) * width(j);
  }
  qs = 0.5 * (qs + qs.transpose()).eval();
  const double fscale = std::max(qs.cwiseAbs().maxCoeff(), cs.cwiseAbs().maxCoeff());
  if (fscale == 0.0) return out;
  qs /= fscale;
  cs /= fscale;

  // Assemble constraints: -y <= 0, y <= 1, normalized linear rows.
  std::vector<RVec> rows_a;
  std::vector<double> rows_h;
  if (p.ineq_b.size() > 0) {
    const RVec rhs = p.ineq_b - p.ineq_a * p.lower;
    for (Eigen::Index j = 0; j < p.ineq_b.size(); ++j) {
      RVec a(n);
      for (Eigen::Index i = 0; i < n; ++i) a(i) = p.ineq_a(j, free_idx[i]) * width(i);
      const double scale = a.cwiseAbs().maxCoeff();
      if (scale == 0.0) continue;  // row only involves fixed variables; checked in validate
      rows_a.push_back(a / scale);
      rows_h.push_back(std::max(0.0, rhs(j) / scale));
    }
  }
  const auto n_rows = static_cast<Eigen::Index>(rows_a.size());
  ConstraintSet cons;
  cons.a = RMat::Zero(2 * n + n_rows, n);
  cons.h = RVec::Zero(2 * n + n_rows);
  for (Eigen::Index i = 0; i < n; ++i) {
    cons.a(i, i) = -1.0;
    cons.a(n + i, i) = 1.0;
    cons.h(n + i) = 1.0;
  }
  for (Eigen::Index j = 0; j < n_rows; ++j) {
    cons.a.row(2 * n + j) = rows_a[j].transpose();
    cons.h(2 * n + j) = rows_h[j];
  }
  const Eigen::Index m_all = cons.h.size();

  RVec y = RVec::Zero(n);
  std::vector<Eigen::Index> working;
  for (Eigen::Index i = 0; i < n; ++i) working.push_back(i);
  std::vector<char> in_working(m_all, 0);
  for (auto i : working) in_working[i] = 1;

  constexpr double kStepTol = 1e-13;
  RVec mu;
  bool converged = false;
  int iter = 0;

  auto working_matrix = [&]() {
    RMat aw(static_cast<Eigen::Index>(working.size()), n);
    for (std::size_t r = 0; r < working.size(); ++r) aw.row(r) = cons.a.row(working[r]);
    return aw;
  };

  for (; iter < opt.max_iterations; ++iter) {
    const RVec g = qs * y + cs;
    const RMat aw = working_matrix();
    const auto m = aw.rows();

    RMat z;
    if (m == 0) {
      z = RMat::Identity(n, n);
    } else {
      Eigen::HouseholderQR<RMat> qr(aw.transpose());
      const RMat qfull = qr.householderQ() * RMat::Identity(n, n);
      z = qfull.rightCols(n - m);
    }

    RVec step = RVec::Zero(n);
    bool ray = false;
    if (z.cols() > 0) {
      const RMat hr = z.transpose() * qs * z;
      const RVec gr = z.transpose() * g;
      Eigen::SelfAdjointEigenSolver<RMat> eig(hr);
      const RVec& lam = eig.eigenvalues();
      const RMat& vec = eig.eigenvectors();
      const double thr = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
      RVec dir = RVec::Zero(gr.size());
      for (Eigen::Index k = 0; k < lam.size(); ++k) {
        const double proj = vec.col(k).dot(gr);
        if (lam(k) <= thr && std::abs(proj) > 1e-14) {
          dir -= proj * vec.col(k);
          ray = true;
        }
      }
      if (!ray) {
        for (Eigen::Index k = 0; k < lam.size(); ++k)
          if (lam(k) > thr) dir -= (vec.col(k).dot(gr) / lam(k)) * vec.col(k);
      }
      step = z * dir;
    }

    if (step.cwiseAbs().maxCoeff() <= kStepTol) {
      if (m == 0) {
        mu.resize(0);
        converged = true;
        break;
      }
      mu = aw.transpose().colPivHouseholderQr().solve(-g);
      Eigen::Index drop = 0;
      const double min_mu = mu.minCoeff(&drop);
      if (min_mu >= -opt.tol) {
        converged = true;
        break;
      }
      in_working[working[drop]] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    double t = ray ? std::numeric_limits<double>::infinity() : 1.0;
    Eigen::Index block = -1;
    const double step_norm = step.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < m_all; ++i) {
      if (in_working[i]) continue;
      const double ap = cons.a.row(i).dot(step);
      if (ap <= 1e-15 * step_norm) continue;
      const double slack = std::max(0.0, cons.h(i) - cons.a.row(i).dot(y));
      const double ti = slack / ap;
      if (ti < t) {
        t = ti;
        block = i;
      }
    }
    if (!std::isfinite(t)) raise(ErrorCode::InvalidArgument, "solve_qp: unbounded direction");
    y += t * step;
    if (block >= 0) {
      working.push_back(block);
      in_working[block] = 1;
    }
  }
  if (!converged) raise(ErrorCode::MaxIterations, "solve_qp: iteration cap reached");

  // KKT residual on the normalized problem.
  const RVec g = qs * y + cs;
  RVec station = g;
  double dual_infeas = 0.0;
  double compl_res = 0.0;
  for (std::size_t r = 0; r < working.size(); ++r) {
    station += mu(r) * cons.a.row(working[r]).transpose();
    dual_infeas = std::max(dual_infeas, -mu(r));
    const double slack = cons.h(working[r]) - cons.a.row(working[r]).dot(y);
    compl_res = std::max(compl_res, std::abs(mu(r) * slack));
  }
  const double primal = std::max(0.0, (cons.a * y - cons.h).maxCoeff());
  out.kkt_residual = std::max({station.cwiseAbs().maxCoeff(), dual_infeas, compl_res, primal});
  out.iterations = iter;

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = free_idx[i];
    out.x(k) = std::clamp(p.lower(k) + width(i) * y(i), p.lower(k), p.upper(k));
  }
  return out;
}

}  // namespace rswarm
