#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "rswarm/channel.hpp"
#include "rswarm/error.hpp"
#include "rswarm/uplink.hpp"
#include "test_util.hpp"

using namespace rswarm;
using rswarm::testing::max_abs;
using rswarm::testing::random_cmat;
using rswarm::testing::random_cvec;
using rswarm::testing::test_rng;

namespace {

ChannelSet random_channels(CounterRng& rng, int m, int k, int n, double hr_scale = 0.05) {
  ChannelSet cs;
  cs.freq_hz = 2e9;
  cs.hd = random_cmat(rng, m, k);
  cs.hu = random_cmat(rng, n, k);
  cs.hb = random_cmat(rng, m, n);
  const CMat a = random_cmat(rng, n, n) * hr_scale;
  cs.hr = 0.5 * (a + a.transpose());
  cs.hr.diagonal().setZero();
  cs.hr_delay_s = RMat::Zero(n, n);
  cs.rep_delays_s = RVec::Zero(n);
  return cs;
}

UplinkSystem random_system(CounterRng& rng, int m, int k, double noise = 0.3) {
  UplinkSystem sys;
  sys.h = random_cmat(rng, m, k);
  const CMat b = random_cmat(rng, m, m);
  sys.sigma = noise * (CMat::Identity(m, m) + 0.2 * b * b.adjoint());
  sys.sigma_b2 = noise;
  return sys;
}

RVec random_powers(CounterRng& rng, int k) {
  RVec r(k);
  for (int i = 0; i < k; ++i) r(i) = 0.2 + rng.uniform();
  return r;
}

// log2 det(I + p Sigma^{-1/2} H H^H Sigma^{-1/2}) from eigenvalues.
double capacity_oracle(const UplinkSystem& sys, double p) {
  Eigen::SelfAdjointEigenSolver<CMat> es(sys.sigma);
  const CMat wh = es.operatorInverseSqrt();
  const CMat a = wh * sys.h * sys.h.adjoint() * wh;
  Eigen::SelfAdjointEigenSolver<CMat> ea(0.5 * (a + a.adjoint()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < ea.eigenvalues().size(); ++i) s += std::log2(1.0 + p * std::max(ea.eigenvalues()(i), 0.0));
  return s;
}

}  // namespace

TEST(Assemble, NoRepeatersIsDirectChannel) {
  auto rng = test_rng(40);
  const ChannelSet cs = random_channels(rng, 4, 3, 0);
  const UplinkSystem sys = assemble(cs, RepeaterConfig{RVec(0), RVec(0)}, {0.5, 0.5}, true);
  EXPECT_EQ(sys.h, cs.hd);
  EXPECT_LT(max_abs(sys.sigma - 0.5 * CMat::Identity(4, 4)), 1e-15);
}

TEST(Assemble, DiagonalModelAndFullModel) {
  auto rng = test_rng(41);
  ChannelSet cs = random_channels(rng, 5, 3, 4);
  RepeaterConfig cfg{RVec::Constant(4, 1.3), RVec::Zero(4)};
  const NoisePowers noise{0.2, 0.7};

  const UplinkSystem diag = assemble(cs, cfg, noise, false);
  const CMat da = cfg.alpha.cast<cplx>().asDiagonal();
  EXPECT_LT(max_abs(diag.h - (cs.hd + cs.hb * da * cs.hu)), 1e-12);
  const CMat sd = 0.2 * CMat::Identity(5, 5) + 0.7 * cs.hb * da * da.adjoint() * cs.hb.adjoint();
  EXPECT_LT(max_abs(diag.sigma - sd), 1e-12);

  const UplinkSystem full = assemble(cs, cfg, noise, true);
  const CMat g = effective_G(cs, cfg);
  EXPECT_LT(max_abs(full.h - (cs.hd + cs.hb * g * cs.hu)), 1e-12);
  EXPECT_LT(max_abs(full.sigma - full.sigma.adjoint()), 1e-15);

  cs.hr.setZero();
  EXPECT_LT(max_abs(assemble(cs, cfg, noise, true).h - assemble(cs, cfg, noise, false).h), 1e-12);
}

TEST(Assemble, NoiseCovarianceGrowsWithGain) {
  auto rng = test_rng(42);
  const ChannelSet cs = random_channels(rng, 4, 2, 3);
  RVec a1(3), a2(3);
  a1 << 0.3, 1.0, 0.0;
  a2 << 0.5, 1.0, 2.0;
  const NoisePowers noise{1.0, 0.5};
  const CMat diff = assemble(cs, {a2, RVec::Zero(3)}, noise, false).sigma -
                    assemble(cs, {a1, RVec::Zero(3)}, noise, false).sigma;
  Eigen::SelfAdjointEigenSolver<CMat> es(diff);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(SumCapacity, OrthonormalChannels) {
  UplinkSystem sys;
  sys.h = CMat::Identity(4, 2);
  sys.sigma = 0.5 * CMat::Identity(4, 4);
  EXPECT_NEAR(sum_capacity(sys, 3.0), 2.0 * std::log2(7.0), 1e-12);
  EXPECT_NEAR(sum_capacity(sys, 3.0, LogBase::Nats), 2.0 * std::log(7.0), 1e-12);
  sys.h.setZero();
  EXPECT_EQ(sum_capacity(sys, 3.0), 0.0);
}

TEST(SumCapacity, MatchesEigenvalueOracle) {
  auto rng = test_rng(43);
  for (int t = 0; t < 20; ++t) {
    const UplinkSystem sys = random_system(rng, 3 + t % 4, 1 + t % 5);
    const double p = 0.1 + 5.0 * rng.uniform();
    EXPECT_NEAR(sum_capacity(sys, p), capacity_oracle(sys, p), 1e-9);
  }
}

TEST(CapacityRegion, SubsetsAndFullSet) {
  auto rng = test_rng(44);
  const UplinkSystem sys = random_system(rng, 4, 3);
  const auto bounds = capacity_region_constraints(sys, 2.0);
  ASSERT_EQ(bounds.size(), 7u);
  EXPECT_EQ(bounds[0].users, std::vector<int>{0});
  EXPECT_EQ(bounds[2].users, (std::vector<int>{0, 1}));
  EXPECT_EQ(bounds[6].users, (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(bounds[6].bound, sum_capacity(sys, 2.0), 1e-12);
  for (unsigned a = 1; a < 8; ++a)
    for (unsigned b = 1; b < 8; ++b)
      if ((a & b) == a) EXPECT_LE(bounds[a - 1].bound, bounds[b - 1].bound + 1e-12);

  UplinkSystem one = sys;
  one.h = sys.h.leftCols(1);
  const auto single = capacity_region_constraints(one, 2.0);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_NEAR(single[0].bound, sum_capacity(one, 2.0), 1e-12);
}

TEST(CapacityRegion, TooManyUsers) {
  auto rng = test_rng(45);
  const UplinkSystem sys = random_system(rng, 4, 11);
  try {
    capacity_region_constraints(sys, 1.0);
    FAIL() << "expected TooManyUsers";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyUsers);
  }
  EXPECT_EQ(capacity_region_constraints(sys, 1.0, 11).size(), 2047u);
}

TEST(Sinr, ScalarExample) {
  UplinkSystem sys;
  sys.h = CMat::Ones(1, 2);
  sys.sigma = CMat::Identity(1, 1);
  const RVec rho = RVec::Ones(2);
  const CVec c = CVec::Ones(1);
  EXPECT_DOUBLE_EQ(sinr(sys, rho, c, 0), 0.5);
  EXPECT_DOUBLE_EQ(sinr(sys, rho, 3.0 * c, 1), 0.5);
  try {
    sinr(sys, rho, CVec::Zero(1), 0);
    FAIL() << "expected ZeroCombiner";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroCombiner);
  }
}

TEST(Mmse, CombinerIsOptimalAndMatchesClosedForm) {
  auto rng = test_rng(46);
  for (int t = 0; t < 20; ++t) {
    const UplinkSystem sys = random_system(rng, 4, 3);
    const RVec rho = random_powers(rng, 3);
    const CMat c = mmse_combiners(sys, rho);
    for (int k = 0; k < 3; ++k) {
      EXPECT_LT(max_abs(c.col(k) - mmse_combiner(sys, rho, k)), 1e-12);
      const double s = sinr(sys, rho, c.col(k), k);
      EXPECT_NEAR(s, sinr_mmse_closed_form(sys, rho, k), 1e-9 * std::max(1.0, s));
      for (int r = 0; r < 5; ++r) EXPECT_LE(sinr(sys, rho, random_cvec(rng, 4), k), s * (1 + 1e-12));
      // sinr is invariant to combiner scaling.
      EXPECT_NEAR(sinr(sys, rho, cplx(0.0, 2.5) * c.col(k), k), s, 1e-9 * s);
    }
  }
}

TEST(Mse, ValuesAtMmseAndElsewhere) {
  auto rng = test_rng(47);
  const UplinkSystem sys = random_system(rng, 4, 3);
  const RVec rho = random_powers(rng, 3);
  const CMat c = mmse_combiners(sys, rho);
  for (int k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(mse(sys, rho, CVec::Zero(4), k), 1.0);
    const double at = mse(sys, rho, c.col(k), k);
    EXPECT_NEAR(at, 1.0 - std::sqrt(rho(k)) * std::real(sys.h.col(k).dot(c.col(k))), 1e-12);
    EXPECT_GT(at, 0.0);
    EXPECT_LT(at, 1.0);
    for (int r = 0; r < 10; ++r) {
      const CVec pert = c.col(k) + 0.1 * random_cvec(rng, 4);
      EXPECT_GE(mse(sys, rho, pert, k), at - 1e-12);
    }
    // 1 + SINR = 1 / MSE at the MMSE combiner.
    EXPECT_NEAR(1.0 + sinr_mmse_closed_form(sys, rho, k), 1.0 / at, 1e-9 / at);
  }
}

TEST(Rates, LogIdentityAndBases) {
  auto rng = test_rng(48);
  const UplinkSystem sys = random_system(rng, 5, 4);
  const RVec rho = random_powers(rng, 4);
  const RVec bits = user_rates(sys, rho);
  const RVec nats = user_rates(sys, rho, LogBase::Nats);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(bits(k), std::log2(1.0 + sinr_mmse_closed_form(sys, rho, k)), 1e-9);
    EXPECT_NEAR(nats(k), bits(k) * std::log(2.0), 1e-12);
  }
  RVec gamma(4);
  gamma << 1.0, 0.5, 2.0, 0.0;
  EXPECT_NEAR(weighted_sum_rate(sys, rho, gamma), gamma.dot(bits), 1e-12);
}

TEST(Rates, LinearMmseNeverBeatsCapacity) {
  auto rng = test_rng(49);
  for (int t = 0; t < 20; ++t) {
    const UplinkSystem sys = random_system(rng, 3 + t % 3, 2 + t % 4);
    const double p = 0.5 + 3.0 * rng.uniform();
    const RVec rho = RVec::Constant(sys.k(), p);
    EXPECT_LE(weighted_sum_rate(sys, rho, RVec::Ones(sys.k())), sum_capacity(sys, p) + 1e-9);
  }
}

TEST(BlueToy, Variance) {
  EXPECT_DOUBLE_EQ(blue_variance_toy(0.0, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(blue_variance_toy(1.0, 3.0), 2.0);
  EXPECT_NEAR(blue_variance_toy(1e6, 1.0), 0.5, 1e-9);
  double prev = 1.0;
  for (double a = 0.1; a < 5.0; a += 0.1) {
    EXPECT_LT(blue_variance_toy(a, 1.0), prev);
    prev = blue_variance_toy(a, 1.0);
  }
}
