#pragma once

#include "rswarm/numerics.hpp"

namespace rswarm {

/// minimize 1/2 x'Qx + c'x  subject to  lower <= x <= upper,  ineq_a x <= ineq_b.
///
/// Q must be symmetric positive semidefinite. `lower` must satisfy the linear
/// rows; this is how feasibility is established, so problems whose feasible
/// set excludes `lower` are reported as Infeasible.
struct QpProblem {
  RMat q;
  RVec c;
  RVec lower;
  RVec upper;
  RMat ineq_a;  // L x N, L may be zero
  RVec ineq_b;

  Eigen::Index size() const { return c.size(); }
  double objective(const RVec& x) const { return 0.5 * x.dot(q * x) + c.dot(x); }
};

struct QpOptions {
  double tol = 1e-8;
  int max_iterations = 10000;
};

struct QpSolution {
  RVec x;
  int iterations = 0;
  /// Max of stationarity, primal infeasibility and complementarity, measured
  /// on the internally normalized problem (unit box widths, unit-scale
  /// objective and rows).
  double kkt_residual = 0.0;
};

/// Primal active-set method with zero-curvature rays for the semidefinite case.
/// Iterates stay feasible; the result is deterministic for a given input.
QpSolution solve_qp(const QpProblem& p, const QpOptions& opt = {});

}  // namespace rswarm
