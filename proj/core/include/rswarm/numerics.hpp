#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace rswarm {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double power_to_db(double p) { return 10.0 * std::log10(p); }
inline double amplitude_to_db(double a) { return 20.0 * std::log10(a); }
inline double dbm_to_watt(double dbm) { return db_to_power(dbm - 30.0); }
inline double watt_to_dbm(double w) { return power_to_db(w) + 30.0; }

/// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const CMat& a, const std::string& what);
void require_finite(const RMat& a, const std::string& what);

/// Max absolute row sum.
double inf_norm(const CMat& a);

struct InverseOptions {
  /// Reciprocal condition estimates below 1/cond_cap raise SingularMatrix.
  double cond_cap = 1e12;
  /// Pivots smaller than pivot_tol * ||A||_inf raise SingularMatrix.
  double pivot_tol = 1e-14;
};

/// Inverse by partially pivoted LU. Near-singular inputs are reported,
/// never regularized.
CMat cmat_inverse(const CMat& a, const InverseOptions& opt = {});

/// Determinant by partially pivoted elimination; returns exactly zero when a
/// pivot column is identically zero.
cplx cmat_det(CMat a);

}  // namespace rswarm
