#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "rswarm/error.hpp"
#include "rswarm/numerics.hpp"
#include "rswarm/rng.hpp"
#include "rswarm/scenario.hpp"

using namespace rswarm;

TEST(CounterRng, StreamsAreIndependentAndReproducible) {
  CounterRng a(7, Stream::Fading, 3);
  CounterRng b(7, Stream::Fading, 3);
  CounterRng c(7, Stream::LineOfSight, 3);
  CounterRng d(7, Stream::Fading, 4);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng r(1, Stream::Test);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0, sc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sc2 += std::norm(r.complex_normal());
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
  EXPECT_NEAR(sc2 / n, 1.0, 0.01);
}

TEST(NoisePower, TwentyMegahertz) {
  Scenario s;
  const NoisePowers n = noise_power(s);
  EXPECT_NEAR(watt_to_dbm(n.bs_w), -91.9897, 1e-3);
  EXPECT_DOUBLE_EQ(n.rep_w, n.bs_w);
}

TEST(NoisePower, HundredMegahertzAndNoiselessRepeater) {
  Scenario s;
  s.bandwidth_hz = 100e6;
  s.rep_noise_ratio = 0.0;
  const NoisePowers n = noise_power(s);
  EXPECT_NEAR(watt_to_dbm(n.bs_w), -85.0, 1e-9);
  EXPECT_EQ(n.rep_w, 0.0);
}

TEST(ScenarioValidate, RejectsBrokenInvariants) {
  Scenario s;
  s.num_repeaters = 65;
  EXPECT_THROW(validate(s), Error);
  s = Scenario{};
  s.eta = 0.0;
  EXPECT_THROW(validate(s), Error);
  s = Scenario{};
  s.eta = 1.0;
  EXPECT_NO_THROW(validate(s));
  s.num_users = 0;
  EXPECT_THROW(validate(s), Error);
  s = Scenario{};
  s.h_rep_m = 0.0;
  EXPECT_THROW(validate(s), Error);
  s = Scenario{};
  s.num_repeaters = 0;
  EXPECT_NO_THROW(validate(s));
}

TEST(PlaceUsers, DeterministicPerSeedAndStream) {
  Scenario s;
  s.num_users = 1;
  const auto a = place_users(s, 0);
  const auto b = place_users(s, 0);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], b[0]);
  EXPECT_NE(place_users(s, 1)[0], a[0]);
  s.seed = 2;
  EXPECT_NE(place_users(s, 0)[0], a[0]);
}

TEST(PlaceUsers, RadialLawOnAnnulus) {
  Scenario s;
  s.num_users = 1000;
  const auto pts = place_users(s);
  const double r0 = s.min_ue_bs_dist_m, r1 = s.cell_radius_m;
  std::vector<double> r;
  for (const auto& p : pts) {
    const double d = std::hypot(p.x(), p.y());
    EXPECT_GE(d, r0);
    EXPECT_LE(d, r1);
    EXPECT_DOUBLE_EQ(p.z(), s.h_ue_m);
    r.push_back(d);
  }
  std::sort(r.begin(), r.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double cdf = (r[i] * r[i] - r0 * r0) / (r1 * r1 - r0 * r0);
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / r.size()),
                   std::abs(cdf - static_cast<double>(i + 1) / r.size())});
  }
  EXPECT_LT(ks, 0.05);
}

TEST(PlaceUsers, ThinAnnulus) {
  Scenario s;
  s.num_users = 50;
  s.min_ue_bs_dist_m = s.cell_radius_m - 1e-3;
  for (const auto& p : place_users(s)) {
    const double d = std::hypot(p.x(), p.y());
    EXPECT_GE(d, s.cell_radius_m - 1e-3);
    EXPECT_LE(d, s.cell_radius_m);
  }
}

TEST(PlaceRepeatersHex, SingleRepeaterSitsOnFirstRing) {
  Scenario s;
  s.num_repeaters = 1;
  const auto p = place_repeaters_hex(s);
  ASSERT_EQ(p.size(), 1u);
  const double d = std::hypot(p[0].x(), p[0].y());
  EXPECT_GE(d, s.min_rep_bs_dist_m);
  // The widest pitch that still fits one point puts it on the cell edge.
  EXPECT_NEAR(d, s.cell_radius_m, 1e-9);
  EXPECT_NEAR(hex_pitch(s), s.cell_radius_m, 1e-6 * s.cell_radius_m);
  EXPECT_DOUBLE_EQ(p[0].z(), s.h_rep_m);
}

TEST(PlaceRepeatersHex, SevenWithoutExclusionIsCenterPlusRing) {
  Scenario s;
  s.num_repeaters = 7;
  s.min_rep_bs_dist_m = 0.0;
  const auto p = place_repeaters_hex(s);
  ASSERT_EQ(p.size(), 7u);
  const double pitch = hex_pitch(s);
  EXPECT_NEAR(std::hypot(p[0].x(), p[0].y()), 0.0, 1e-9);
  for (int i = 1; i < 7; ++i) {
    EXPECT_NEAR(std::hypot(p[i].x(), p[i].y()), pitch, 1e-6 * pitch);
    const double a = std::atan2(p[i].y(), p[i].x());
    EXPECT_NEAR(std::remainder(a - (i - 1) * kPi / 3.0, 2.0 * kPi), 0.0, 1e-9);
  }
}

TEST(PlaceRepeatersHex, DefaultFortyRespectsDistances) {
  Scenario s;
  const auto p = place_repeaters_hex(s);
  ASSERT_EQ(p.size(), 40u);
  double min_pair = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::hypot(p[i].x(), p[i].y());
    EXPECT_GE(d, s.min_rep_bs_dist_m);
    EXPECT_LE(d, s.cell_radius_m);
    for (std::size_t j = i + 1; j < p.size(); ++j) min_pair = std::min(min_pair, (p[i] - p[j]).norm());
  }
  EXPECT_GT(min_pair, 0.0);
  // A larger pitch could not hold 40 points.
  EXPECT_EQ(place_repeaters_hex(s), p);
}

TEST(PlaceRepeatersHex, PackingFailed) {
  Scenario s;
  s.cell_radius_m = 10.0;
  s.min_rep_bs_dist_m = 0.0;
  s.min_ue_bs_dist_m = 0.0;
  s.num_bs_antennas = 2000;
  s.num_repeaters = 1000;
  try {
    place_repeaters_hex(s);
    FAIL() << "expected PackingFailed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PackingFailed);
  }
}

TEST(PlaceRepeatersCircle, Chords) {
  auto chord = [](const std::vector<Point3>& p, int i, int j) { return (p[i] - p[j]).norm(); };
  const auto p4 = place_repeaters_circle(4, 1.0);
  EXPECT_NEAR(chord(p4, 0, 1), std::sqrt(2.0), 1e-12);
  const auto p15 = place_repeaters_circle(15, 1000.0);
  EXPECT_NEAR(chord(p15, 0, 1), 2000.0 * std::sin(kPi / 15.0), 1e-9);
  EXPECT_NEAR(chord(p15, 0, 1), 415.823, 1e-3);
  const auto p2 = place_repeaters_circle(2, 1.0);
  EXPECT_NEAR(chord(p2, 0, 1), 2.0, 1e-12);
  EXPECT_THROW(place_repeaters_circle(1, 1.0), Error);
}

TEST(PlaceRepeatersCircle, ChordMatrixIsSymmetricCirculant) {
  const int n = 9;
  const auto p = place_repeaters_circle(n, 250.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = (p[i] - p[j]).norm();
      EXPECT_NEAR(d, (p[j] - p[i]).norm(), 1e-12);
      EXPECT_NEAR(d, (p[(i + 1) % n] - p[(j + 1) % n]).norm(), 1e-9);
      const int k = ((j - i) % n + n) % n;
      EXPECT_NEAR(d, 2.0 * 250.0 * std::sin(k * kPi / n), 1e-9);
    }
}

TEST(MakeLayout, BitIdenticalForSameSeed) {
  Scenario s;
  const Layout a = make_layout(s, 3);
  const Layout b = make_layout(s, 3);
  EXPECT_EQ(a.user_pos, b.user_pos);
  EXPECT_EQ(a.rep_pos, b.rep_pos);
  EXPECT_DOUBLE_EQ(a.bs_pos.z(), s.h_bs_m);
  s.num_repeaters = 0;
  EXPECT_TRUE(make_layout(s).rep_pos.empty());
}
