#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "phlab/noisemodel.hpp"
#include "phlab/random.hpp"

namespace phlab::noise {
namespace {

NoiseMix measured_mix() {
  NoiseMix m;
  m.zeta = 0.55;
  m.g2_noise = 0.99;
  m.g2_signal_auto = 1.99;
  m.g2_signal_auto_heralded = 0.47;
  m.g2_cross_in = 9.69;
  m.g2_ss = 1.58;
  m.g2_ss_heralded_in = 0.34;
  return m;
}

TEST(MixCross, PaperValue) {
  EXPECT_NEAR(mix_cross(9.69, 0.55), (9.69 * 0.55 + 1.0) / 1.55, 1e-15);
  EXPECT_NEAR(mix_cross(9.69, 0.55), 4.09, 0.01);
}

TEST(MixCross, Limits) {
  for (double g : {0.0, 0.5, 1.0, 3.0, 42.0}) {
    EXPECT_DOUBLE_EQ(mix_cross(g, 0.0), 1.0);
    EXPECT_NEAR(mix_cross(g, 1e9), g, 1e-6 * std::max(g, 1.0));
    EXPECT_DOUBLE_EQ(mix_cross(1.0, g), 1.0);
  }
}

TEST(MixCross, MonotoneAndBracketed) {
  double last = mix_cross(9.69, 0.0);
  for (double z = 0.1; z < 100.0; z *= 1.5) {
    const double v = mix_cross(9.69, z);
    EXPECT_GT(v, last);
    EXPECT_GE(v, 1.0);
    EXPECT_LE(v, 9.69);
    last = v;
  }
  EXPECT_LE(mix_cross(0.3, 2.0), 1.0);
  EXPECT_GE(mix_cross(0.3, 2.0), 0.3);
}

TEST(MixAuto, PaperValues) {
  EXPECT_NEAR(mix_auto(1.99, 0.99, 0.55), 1.1205, 1e-4);
  EXPECT_NEAR(mix_auto(1.99, 0.99, 0.55), 1.12, 0.01);
  EXPECT_NEAR(heralded_zeta(9.69, 0.55), 5.3295, 1e-12);
  EXPECT_NEAR(mix_auto(0.47, 0.99, 5.3295), 0.624, 1e-3);
  EXPECT_NEAR(mix_auto(0.47, 0.99, 5.3295), 0.62, 0.01);
}

TEST(MixAuto, Limits) {
  EXPECT_DOUBLE_EQ(mix_auto(2.0, 1.3, 0.0), 1.3);
  for (double z : {0.0, 0.1, 1.0, 7.0, 1e6}) EXPECT_NEAR(mix_auto(1.0, 1.0, z), 1.0, 1e-12);
  EXPECT_THROW(mix_auto(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(MixHeraldedSs, PaperValue) {
  EXPECT_NEAR(mix_heralded_ss(0.34, 1.58, 9.69, 4.09, 0.55), 0.738, 1e-3);
  EXPECT_NEAR(mix_heralded_ss(0.34, 1.58, 9.69, 4.09, 0.55), 0.74, 0.01);
}

TEST(MixHeraldedSs, BothPathsAgree) {
  for (double z : {0.01, 0.55, 3.0, 40.0}) {
    EXPECT_NEAR(mix_heralded_ss(0.34, 1.58, 9.69, z),
                mix_heralded_ss(0.34, 1.58, 9.69, mix_cross(9.69, z), z), 1e-12);
  }
}

TEST(MixHeraldedSs, Limits) {
  EXPECT_NEAR(mix_heralded_ss(0.34, 1.58, 9.69, 1e9), 0.34, 1e-6);
  EXPECT_DOUBLE_EQ(mix_heralded_ss(0.34, 1.58, 9.69, 1.0, 0.0), 1.58);
  EXPECT_THROW(mix_heralded_ss(0.34, 1.58, 9.69, 0.0, 0.55), DivisionByZero);
}

TEST(Solve, PaperInversion) {
  const auto s = solve_zeta_gnoise({9.69, 4.09, 1.99, 1.12});
  EXPECT_NEAR(s.zeta, 0.55, 0.02);
  EXPECT_NEAR(s.g2_noise, 0.99, 0.03);
  EXPECT_FALSE(s.negative_noise);
}

TEST(Solve, ExactRoundTrip) {
  const double z = 2.0, gn = 1.3, gc = 8.0, ga = 2.0;
  const auto s = solve_zeta_gnoise({gc, mix_cross(gc, z), ga, mix_auto(ga, gn, z)});
  EXPECT_NEAR(s.zeta, z, 1e-12);
  EXPECT_NEAR(s.g2_noise, gn, 1e-12);
}

TEST(Solve, RoundTripProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> zeta(0.01, 20.0), cross(1.05, 50.0), autos(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double z = zeta(rng), gc = cross(rng), ga = autos(rng), gn = autos(rng);
    const auto s = solve_zeta_gnoise({gc, mix_cross(gc, z), ga, mix_auto(ga, gn, z)});
    ASSERT_NEAR(s.zeta, z, 1e-10 * z) << i;
    ASSERT_NEAR(s.g2_noise, gn, 1e-10 * std::max(1.0, gn)) << i;
  }
}

TEST(Solve, NoSolutionCases) {
  EXPECT_THROW(solve_zeta_gnoise({4.0, 4.0, 2.0, 1.5}), NoSolution);
  EXPECT_THROW(solve_zeta_gnoise({4.0, 0.9, 2.0, 1.5}), NoSolution);
  EXPECT_THROW(solve_zeta_gnoise({0.8, 0.9, 2.0, 1.5}), NoSolution);
}

TEST(Solve, FlagsNegativeNoise) {
  const auto s = solve_zeta_gnoise({9.69, 4.09, 1.99, 0.5});
  EXPECT_TRUE(s.negative_noise);
  EXPECT_LT(s.g2_noise, 0.0);
}

TEST(Scenario, PaperScenarios) {
  const auto base = measured_mix();
  const auto a = predict_scenario(base, {10.0, "a"});
  EXPECT_NEAR(a.g2_ss_given_ast, 0.39, 0.01);
  EXPECT_NEAR(a.g2_ast_ast_given_s, 0.49, 0.01);
  EXPECT_NEAR(a.zeta, 5.5, 1e-12);
  const auto b = predict_scenario(base, {1.25, "b"});
  EXPECT_NEAR(b.g2_ss_given_ast, 0.68, 0.01);
  EXPECT_NEAR(b.g2_ast_ast_given_s, 0.60, 0.01);
  const auto c = predict_scenario(base, {1.0, "baseline"});
  EXPECT_NEAR(c.g2_ss_given_ast, 0.74, 0.01);
  EXPECT_NEAR(c.g2_ast_ast_given_s, 0.62, 0.01);
  EXPECT_EQ(c.label, "baseline");
  EXPECT_THROW(predict_scenario(base, {0.0, "bad"}), std::invalid_argument);
}

TEST(Scenario, DefaultList) {
  const auto s = default_scenarios();
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[1].zeta_multiplier, 10.0);
  EXPECT_DOUBLE_EQ(s[2].zeta_multiplier, 1.25);
}

// Photon-number model: thermal pairs plus independent Poisson noise on the
// anti-Stokes side. Normal-ordered moments factorise and the cross
// correlation of S with signal+noise follows mix_cross.
TEST(NormalOrderedMoments, IndependentNoiseFactorises) {
  const double mu = 0.2, noise_mean = 0.1;
  const double x = mu / (1.0 + mu);
  const int batches = 50, per_batch = 200'000;
  std::vector<double> cross_b, m1_b, m2_b;
  for (int b = 0; b < batches; ++b) {
    Rng rng = make_stream(123, static_cast<std::uint64_t>(b), 0);
    double s = 0, nz = 0, s_nz = 0, s2 = 0, s2_nz = 0, a = 0, s_a = 0;
    for (int i = 0; i < per_batch; ++i) {
      const double n = static_cast<double>(sample_geometric(x, rng));
      const double z = static_cast<double>(sample_poisson(noise_mean, rng));
      s += n;
      nz += z;
      s_nz += n * z;
      s2 += n * (n - 1.0);
      s2_nz += n * (n - 1.0) * z;
      a += n + z;
      s_a += n * (n + z);
    }
    const double N = per_batch;
    m1_b.push_back(s_nz / N - (s / N) * (nz / N));
    m2_b.push_back(s2_nz / N - (s2 / N) * (nz / N));
    cross_b.push_back((s_a / N) / ((s / N) * (a / N)));
  }
  auto mean_sem = [](const std::vector<double>& v) {
    double m = 0, q = 0;
    for (double e : v) m += e;
    m /= static_cast<double>(v.size());
    for (double e : v) q += (e - m) * (e - m);
    return std::pair{m, std::sqrt(q / static_cast<double>(v.size() - 1) /
                                  static_cast<double>(v.size()))};
  };
  const auto [m1, e1] = mean_sem(m1_b);
  const auto [m2, e2] = mean_sem(m2_b);
  const auto [gc, ec] = mean_sem(cross_b);
  EXPECT_LT(std::abs(m1), 3.0 * e1);
  EXPECT_LT(std::abs(m2), 3.0 * e2);
  const double zeta = mu / noise_mean;
  EXPECT_LT(std::abs(gc - mix_cross(2.0 + 1.0 / mu, zeta)), 3.0 * ec);
}

}  // namespace
}  // namespace phlab::noise
