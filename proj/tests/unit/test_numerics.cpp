#include <gtest/gtest.h>

#include "rswarm/error.hpp"
#include "rswarm/numerics.hpp"
#include "test_util.hpp"

using namespace rswarm;
using rswarm::testing::max_abs;
using rswarm::testing::random_cmat;
using rswarm::testing::test_rng;

TEST(Decibels, RoundTrips) {
  EXPECT_NEAR(db_to_power(30.0), 1000.0, 1e-9);
  EXPECT_NEAR(db_to_amplitude(20.0), 10.0, 1e-12);
  EXPECT_NEAR(dbm_to_watt(23.0), 0.19952623149688797, 1e-15);
  EXPECT_NEAR(watt_to_dbm(1.0), 30.0, 1e-12);
  EXPECT_NEAR(amplitude_to_db(db_to_amplitude(-37.5)), -37.5, 1e-12);
}

TEST(Inverse, Identity) {
  const CMat i3 = CMat::Identity(3, 3);
  EXPECT_LT(max_abs(cmat_inverse(i3) - i3), 1e-15);
}

TEST(Inverse, Diagonal) {
  CMat a = CMat::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = cplx(0.0, 4.0);
  const CMat x = cmat_inverse(a);
  EXPECT_NEAR(std::abs(x(0, 0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(x(1, 1) - cplx(0.0, -0.25)), 0.0, 1e-15);
  EXPECT_EQ(x(0, 1), cplx(0.0, 0.0));
}

TEST(Inverse, RandomResidualAndInvolution) {
  auto rng = test_rng(1);
  for (int t = 0; t < 20; ++t) {
    CMat a = random_cmat(rng, 5, 5);
    a.diagonal().array() += 3.0;
    const CMat x = cmat_inverse(a);
    EXPECT_LT(max_abs(a * x - CMat::Identity(5, 5)), 1e-10);
    EXPECT_LE(max_abs(cmat_inverse(x) - a), 1e-8 * inf_norm(a));
  }
}

TEST(Inverse, SingularRaises) {
  CMat a(2, 2);
  a << 1.0, 2.0, 2.0, 4.0;
  try {
    cmat_inverse(a);
    FAIL() << "expected SingularMatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMatrix);
  }
  EXPECT_THROW(cmat_inverse(CMat::Zero(3, 3)), Error);
}

TEST(Inverse, ConditionCapRaises) {
  CMat a = CMat::Identity(2, 2);
  a(1, 1) = 1e-13;  // condition 1e13 > cap 1e12
  EXPECT_THROW(cmat_inverse(a), Error);
  a(1, 1) = 1e-10;
  EXPECT_NO_THROW(cmat_inverse(a));
}

TEST(Inverse, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(cmat_inverse(CMat::Zero(2, 3)), Error);
  CMat a = CMat::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cmat_inverse(a), Error);
}

TEST(Determinant, IdentityAndTwoByTwo) {
  EXPECT_EQ(cmat_det(CMat::Identity(4, 4)), cplx(1.0, 0.0));
  const cplx x(0.3, -0.7);
  CMat a(2, 2);
  a << 1.0, x, x, 1.0;
  EXPECT_LT(std::abs(cmat_det(a) - (1.0 - x * x)), 1e-15);
}

TEST(Determinant, TriangularIsExactProduct) {
  CMat a = CMat::Zero(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = cplx(0.0, 3.0);
  a(2, 2) = -0.5;
  a(0, 1) = 7.0;
  a(0, 2) = cplx(1.0, 1.0);
  a(1, 2) = 4.0;
  EXPECT_EQ(cmat_det(a), cplx(2.0, 0.0) * cplx(0.0, 3.0) * cplx(-0.5, 0.0));
}

TEST(Determinant, ZeroColumnGivesExactZero) {
  CMat a = CMat::Identity(3, 3);
  a.col(1).setZero();
  EXPECT_EQ(cmat_det(a), cplx(0.0, 0.0));
}

TEST(Determinant, CirculantMatchesDftProduct) {
  auto rng = test_rng(2);
  for (int t = 0; t < 10; ++t) {
    const int n = 5;
    const CMat qv = random_cmat(rng, n, 1);
    CMat c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = qv(((j - i) % n + n) % n, 0);
    cplx prod = 1.0;
    for (int k = 0; k < n; ++k) {
      cplx lam = 0.0;
      for (int m = 0; m < n; ++m) lam += qv(m, 0) * std::polar(1.0, 2.0 * kPi * k * m / n);
      prod *= lam;
    }
    EXPECT_LE(std::abs(cmat_det(c) - prod), 1e-10 * std::abs(prod));
  }
}

TEST(Determinant, MultiplicativeOnRandomPairs) {
  auto rng = test_rng(3);
  for (int t = 0; t < 50; ++t) {
    const CMat a = random_cmat(rng, 4, 4);
    const CMat b = random_cmat(rng, 4, 4);
    const cplx lhs = cmat_det(a * b);
    const cplx rhs = cmat_det(a) * cmat_det(b);
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::abs(rhs));
  }
}

TEST(Determinant, AgreesWithLuDeterminant) {
  auto rng = test_rng(4);
  for (int n : {1, 2, 7, 15}) {
    const CMat a = random_cmat(rng, n, n);
    const cplx ref = a.partialPivLu().determinant();
    EXPECT_LE(std::abs(cmat_det(a) - ref), 1e-10 * std::abs(ref));
  }
}

TEST(Determinant, EmptyMatrixIsOne) { EXPECT_EQ(cmat_det(CMat(0, 0)), cplx(1.0, 0.0)); }
