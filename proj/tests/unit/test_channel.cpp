#include <gtest/gtest.h>

#include <cmath>

#include "rswarm/channel.hpp"
#include "rswarm/error.hpp"
#include "rswarm/pathloss.hpp"
#include "rswarm/scenario.hpp"
#include "test_util.hpp"

using namespace rswarm;
using rswarm::testing::max_abs;
using rswarm::testing::random_cmat;
using rswarm::testing::test_rng;

namespace {

double fs_amp(double f, double d) { return kSpeedOfLight / (4.0 * kPi * f * d); }

Scenario small_scenario(int m, int k, int n) {
  Scenario s;
  s.num_bs_antennas = m;
  s.num_users = k;
  s.num_repeaters = n;
  return s;
}

CMat symmetric_hr(CounterRng& rng, int n, double scale) {
  CMat a = random_cmat(rng, n, n) * scale;
  CMat hr = 0.5 * (a + a.transpose());
  hr.diagonal().setZero();
  return hr;
}

}  // namespace

TEST(Pathloss, FreeSpaceAmplitude) {
  const PathlossModel m = free_space_model();
  for (double d : {1.0, 37.0, 415.8, 5000.0}) {
    const double beta = large_scale_gain(m, LinkClass::RepeaterRepeater, d, true, 6e9);
    EXPECT_NEAR(std::sqrt(beta) / fs_amp(6e9, d), 1.0, 1e-12);
  }
  const double a = std::sqrt(large_scale_gain(m, LinkClass::RepeaterRepeater, 415.8, true, 2e9));
  EXPECT_NEAR(a / 2.871e-5, 1.0, 1e-3);
  EXPECT_DOUBLE_EQ(los_probability(m, LinkClass::Direct, 900.0), 1.0);
}

TEST(Pathloss, DistanceFloor) {
  const PathlossModel m = free_space_model();
  EXPECT_DOUBLE_EQ(pathloss_db(m, LinkClass::Direct, 0.0, true, 6e9),
                   pathloss_db(m, LinkClass::Direct, 1.0, true, 6e9));
}

TEST(Pathloss, LogDistanceInterceptAndBreakpoint) {
  const Scenario s;
  const PathlossModel m = uma_umi_approx(s);
  EXPECT_NEAR(pathloss_db(m, LinkClass::Direct, 1.0, true, s.carrier_hz), 28.0 + 20.0 * std::log10(6.0), 1e-12);
  EXPECT_NEAR(pathloss_db(m, LinkClass::UserRepeater, 10.0, true, s.carrier_hz),
              32.4 + 20.0 * std::log10(6.0) + 21.0, 1e-12);

  const SlopeSet& los = m.cls(LinkClass::Direct).los;
  ASSERT_TRUE(std::isfinite(los.breakpoint_m));
  EXPECT_NEAR(los.breakpoint_m, 4.0 * 24.0 * 0.5 * s.carrier_hz / kSpeedOfLight, 1e-9);
  const double bp = los.breakpoint_m;
  EXPECT_NEAR(los.loss_db(bp * (1 - 1e-12)), los.loss_db(bp * (1 + 1e-12)), 1e-9);
  EXPECT_NEAR(los.loss_db(10.0 * bp) - los.loss_db(bp), 40.0, 1e-9);
}

TEST(Pathloss, NlosNeverBeatsLos) {
  const Scenario s;
  const PathlossModel m = uma_umi_approx(s);
  for (int c = 0; c < kNumLinkClasses; ++c)
    for (double d = 5.0; d < 3000.0; d *= 1.7) {
      const auto lc = static_cast<LinkClass>(c);
      EXPECT_GE(pathloss_db(m, lc, d, false, s.carrier_hz), pathloss_db(m, lc, d, true, s.carrier_hz));
    }
}

TEST(Pathloss, BsGainOnlyOnBsLinks) {
  Scenario s;
  const PathlossModel m = uma_umi_approx(s);
  auto gain_db = [&](LinkClass c) {
    return power_to_db(large_scale_gain(m, c, 200.0, true, s.carrier_hz)) +
           pathloss_db(m, c, 200.0, true, s.carrier_hz);
  };
  EXPECT_NEAR(gain_db(LinkClass::Direct), 8.0, 1e-9);
  EXPECT_NEAR(gain_db(LinkClass::RepeaterBs), 8.0, 1e-9);
  EXPECT_NEAR(gain_db(LinkClass::UserRepeater), 0.0, 1e-9);
  EXPECT_NEAR(gain_db(LinkClass::RepeaterRepeater), 0.0, 1e-9);
}

TEST(Pathloss, LosCurve) {
  const LosCurve c{18.0, 63.0};
  EXPECT_DOUBLE_EQ(c.probability(10.0), 1.0);
  EXPECT_DOUBLE_EQ(c.probability(18.0), 1.0);
  EXPECT_NEAR(c.probability(100.0), 0.18 + std::exp(-100.0 / 63.0) * 0.82, 1e-15);
  double prev = 1.0;
  for (double d = 20.0; d < 2000.0; d += 20.0) {
    EXPECT_LE(c.probability(d), prev);
    prev = c.probability(d);
  }
  EXPECT_DOUBLE_EQ((LosCurve{18.0, 0.0}).probability(1e4), 1.0);
  EXPECT_DOUBLE_EQ((LosCurve{-1.0, 63.0}).probability(1.0), 0.0);
}

TEST(Pathloss, ExternalTableInterpolatesInLogDistance) {
  PathlossModel m;
  m.kind = PathlossKind::ExternalTable;
  m.cls(LinkClass::Direct).table = {{10.0, 60.0}, {100.0, 90.0}, {1000.0, 130.0}};
  EXPECT_DOUBLE_EQ(pathloss_db(m, LinkClass::Direct, 5.0, true, 6e9), 60.0);
  EXPECT_NEAR(pathloss_db(m, LinkClass::Direct, std::sqrt(1000.0), true, 6e9), 75.0, 1e-9);
  EXPECT_NEAR(pathloss_db(m, LinkClass::Direct, std::sqrt(1e5), false, 6e9), 110.0, 1e-9);
  EXPECT_DOUBLE_EQ(pathloss_db(m, LinkClass::Direct, 5000.0, true, 6e9), 130.0);
  EXPECT_THROW(pathloss_db(m, LinkClass::RepeaterBs, 50.0, true, 6e9), Error);
}

TEST(BuildChannels, ShapesAndNoRepeaters) {
  Scenario s = small_scenario(8, 3, 0);
  const ChannelSet cs = build_channels(s, make_layout(s), uma_umi_approx(s));
  EXPECT_EQ(cs.m(), 8);
  EXPECT_EQ(cs.k(), 3);
  EXPECT_EQ(cs.n(), 0);
  EXPECT_EQ(cs.hb.cols(), 0);
  EXPECT_EQ(cs.hu.rows(), 0);
}

TEST(BuildChannels, DirectChannelIndependentOfRepeaterCount) {
  Scenario a = small_scenario(8, 4, 3);
  Scenario b = small_scenario(8, 4, 7);
  const PathlossModel m = uma_umi_approx(a);
  const ChannelSet ca = build_channels(a, make_layout(a), m);
  const ChannelSet cb = build_channels(b, make_layout(b), m);
  EXPECT_EQ(ca.hd, cb.hd);
}

TEST(BuildChannels, TrialsAreIndependentAndReproducible) {
  Scenario s = small_scenario(6, 3, 5);
  const Layout l = make_layout(s);
  const PathlossModel m = uma_umi_approx(s);
  ChannelOptions o1, o2;
  o2.trial = 1;
  const ChannelSet a = build_channels(s, l, m, o1);
  EXPECT_EQ(a.hu, build_channels(s, l, m, o1).hu);
  EXPECT_NE(a.hu, build_channels(s, l, m, o2).hu);
}

TEST(BuildChannels, RepeaterMatrixStructure) {
  Scenario s = small_scenario(6, 2, 6);
  ChannelOptions opt;
  opt.self_interference_amp = 1e-7;
  const ChannelSet cs = build_channels(s, make_layout(s), uma_umi_approx(s), opt);
  EXPECT_EQ(cs.hr, cs.hr.transpose());
  for (int i = 0; i < cs.n(); ++i) EXPECT_EQ(cs.hr(i, i), cplx(1e-7, 0.0));
  EXPECT_EQ(cs.hr_delay_s, cs.hr_delay_s.transpose());
  EXPECT_EQ(cs.rep_delays_s, RVec::Zero(6));
}

TEST(BuildChannels, ForcedLosBackhaulHasDeterministicMagnitude) {
  Scenario s = small_scenario(6, 2, 5);
  PathlossModel m = uma_umi_approx(s);
  m.cls(LinkClass::RepeaterBs).shadow_los_db = 0.0;
  const Layout l = make_layout(s);
  const ChannelSet cs = build_channels(s, l, m);
  for (int n = 0; n < cs.n(); ++n) {
    const double beta = large_scale_gain(m, LinkClass::RepeaterBs, (l.rep_pos[n] - l.bs_pos).norm(), true,
                                         s.carrier_hz);
    for (int i = 0; i < cs.m(); ++i) EXPECT_NEAR(std::abs(cs.hb(i, n)) / std::sqrt(beta), 1.0, 1e-12);
  }
}

TEST(BuildChannels, FreeSpaceModelMatchesFormula) {
  Scenario s = small_scenario(4, 2, 4);
  const Layout l = make_layout(s);
  const ChannelSet cs = build_channels(s, l, free_space_model());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      const double d = (l.rep_pos[i] - l.rep_pos[j]).norm();
      EXPECT_NEAR(std::abs(cs.hr(i, j)) / fs_amp(s.carrier_hz, d), 1.0, 1e-12);
      EXPECT_NEAR(cs.hr_delay_s(i, j), d / kSpeedOfLight, 1e-18);
    }
  const CMat ref = free_space_hr(l.rep_pos, s.omega());
  EXPECT_LT(max_abs(cs.hr - ref), 1e-15);
}

TEST(FreeSpaceHr, CoLocatedRepeatersStayFinite) {
  const std::vector<Point3> pos{{0, 0, 0}, {0, 0, 0}, {3, 4, 0}};
  const CMat hr = free_space_hr(pos, 2.0 * kPi * 2e9);
  EXPECT_TRUE(hr.allFinite());
  EXPECT_NEAR(std::abs(hr(0, 1)), fs_amp(2e9, 1.0), 1e-15);
}

TEST(FreeSpaceHr, CircleIsCirculant) {
  const int n = 7;
  const CMat hr = free_space_hr(place_repeaters_circle(n, 300.0), 2.0 * kPi * 2e9);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) EXPECT_LT(std::abs(hr(i, j) - hr((i + 1) % n, (j + 1) % n)), 1e-12);
}

TEST(RepeaterResponse, Examples) {
  RepeaterConfig cfg{RVec::Constant(2, 2.0), RVec::Zero(2)};
  const double omega = 2.0 * kPi * 1e9;
  EXPECT_LT(std::abs(repeater_response(cfg, omega)(0) - 2.0), 1e-15);
  cfg.alpha(1) = 1.0;
  cfg.nu_s(1) = kPi / (2.0 * omega);
  EXPECT_LT(std::abs(repeater_response(cfg, omega)(1) - cplx(0.0, -1.0)), 1e-12);
}

TEST(RepeaterConfig, Validate) {
  RepeaterConfig cfg{RVec::Constant(3, 1.0), RVec::Zero(3)};
  EXPECT_NO_THROW(validate(cfg, 3, 10.0));
  EXPECT_THROW(validate(cfg, 2), Error);
  cfg.alpha(0) = -1e-9;
  EXPECT_THROW(validate(cfg, 3), Error);
  cfg.alpha(0) = 11.0;
  EXPECT_THROW(validate(cfg, 3, 10.0), Error);
  cfg.alpha(0) = 1.0;
  cfg.nu_s(2) = -1.0;
  EXPECT_THROW(validate(cfg, 3), Error);
}

TEST(EffectiveG, NoCouplingGivesDiagonalGains) {
  RVec a(3);
  a << 0.5, 2.0, 7.0;
  const CMat g = effective_G(CMat::Zero(3, 3), RepeaterConfig{a, RVec::Zero(3)}, 1.0);
  EXPECT_LT(max_abs(g - CMat(a.cast<cplx>().asDiagonal())), 1e-15);
}

TEST(EffectiveG, TwoRepeaterClosedForm) {
  const cplx gc(0.2, -0.1);
  CMat hr = CMat::Zero(2, 2);
  hr(0, 1) = hr(1, 0) = gc;
  const double a1 = 1.5, a2 = 0.8;
  RVec a(2);
  a << a1, a2;
  const CMat g = effective_G(hr, RepeaterConfig{a, RVec::Zero(2)}, 1.0);
  const cplx det = 1.0 - a1 * a2 * gc * gc;
  CMat ref(2, 2);
  ref << a1, a1 * a2 * gc, a1 * a2 * gc, a2;
  ref /= det;
  EXPECT_LT(max_abs(g - ref), 1e-14);
}

TEST(EffectiveG, SingularAtLoopUnity) {
  CMat hr = CMat::Zero(2, 2);
  hr(0, 1) = hr(1, 0) = 0.25;
  try {
    effective_G(hr, RepeaterConfig{RVec::Constant(2, 4.0), RVec::Zero(2)}, 1.0);
    FAIL() << "expected SingularMatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMatrix);
  }
}

TEST(EffectiveG, FixedPointAndTransposeSymmetry) {
  auto rng = test_rng(20);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 6;
    const CMat hr = symmetric_hr(rng, n, 0.05);
    RepeaterConfig cfg{RVec(n), RVec(n)};
    for (int i = 0; i < n; ++i) {
      cfg.alpha(i) = 0.5 + rng.uniform();
      cfg.nu_s(i) = 1e-9 * i;
    }
    const double omega = 2.0 * kPi * 1e9;
    const CMat g = effective_G(hr, cfg, omega);
    const CVec a = repeater_response(cfg, omega);
    const CMat da = a.asDiagonal();
    EXPECT_LT(max_abs(g - (da + da * hr * g)), 1e-9);
    EXPECT_LT(max_abs(g - g.transpose()), 1e-12);
  }
}

TEST(SelfInterference, Examples) {
  EXPECT_DOUBLE_EQ(self_interference_gain(1.0, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(self_interference_gain(3.0, 0.0), 3.0);
  try {
    self_interference_gain(2.0, 0.5);
    FAIL() << "expected DivergentLoop";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivergentLoop);
  }
  double prev = 0.0;
  for (double a = 0.1; a < 1.9; a += 0.1) {
    const double g = self_interference_gain(a, 0.5);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(PhaseAbsorbedHb, MatchesComplexGains) {
  auto rng = test_rng(21);
  ChannelSet cs;
  cs.freq_hz = 3.5e9;
  cs.hb = random_cmat(rng, 5, 3);
  cs.hr = CMat::Zero(3, 3);
  RepeaterConfig cfg{RVec::Constant(3, 2.0), RVec(3)};
  cfg.nu_s << 0.0, 1.3e-9, 7.7e-8;
  const CMat lhs = cs.hb * repeater_response(cfg, 2.0 * kPi * cs.freq_hz).asDiagonal();
  const CMat rhs = phase_absorbed_hb(cs, cfg) * cfg.alpha.cast<cplx>().asDiagonal();
  EXPECT_LT(max_abs(lhs - rhs), 1e-14);
}
