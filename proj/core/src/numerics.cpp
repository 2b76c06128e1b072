#include "rswarm/numerics.hpp"

#include <cmath>

#include "rswarm/error.hpp"

namespace rswarm {

void require_finite(const CMat& a, const std::string& what) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag()))
        raise(ErrorCode::InvalidArgument, what + ": non-finite entry");
}

void require_finite(const RMat& a, const std::string& what) {
  if (!a.allFinite()) raise(ErrorCode::InvalidArgument, what + ": non-finite entry");
}

double inf_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

CMat cmat_inverse(const CMat& a, const InverseOptions& opt) {
  require(a.rows() == a.cols() && a.rows() > 0, "cmat_inverse: matrix must be square and nonempty");
  require_finite(a, "cmat_inverse");

  const double norm = inf_norm(a);
  if (norm == 0.0) raise(ErrorCode::SingularMatrix, "cmat_inverse: zero matrix");

  Eigen::PartialPivLU<CMat> lu(a);
  const CMat& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (std::abs(packed(i, i)) < opt.pivot_tol * norm)
      raise(ErrorCode::SingularMatrix, "cmat_inverse: pivot below tolerance");
  }
  const double rcond = lu.rcond();
  if (!(rcond * opt.cond_cap >= 1.0))
    raise(ErrorCode::SingularMatrix, "cmat_inverse: condition number above cap");
  return lu.inverse();
}

cplx cmat_det(CMat a) {
  require(a.rows() == a.cols(), "cmat_det: matrix must be square");
  const Eigen::Index n = a.rows();
  cplx det{1.0, 0.0};
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    double best = std::abs(a(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return {0.0, 0.0};
    if (piv != k) {
      a.row(k).swap(a.row(piv));
      det = -det;
    }
    const cplx pivot = a(k, k);
    det *= pivot;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const cplx f = a(i, k) / pivot;
      if (f == cplx{}) continue;
      for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

}  // namespace rswarm
