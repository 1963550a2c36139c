#include <cmath>

#include <gtest/gtest.h>

#include "phlab/random.hpp"

namespace phlab {
namespace {

struct Moments {
  double mean = 0, var = 0;
};

template <class F>
Moments moments(int n, F&& draw) {
  double s = 0, q = 0;
  for (int i = 0; i < n; ++i) {
    const double v = static_cast<double>(draw());
    s += v;
    q += v * v;
  }
  const double m = s / n;
  return {m, q / n - m * m};
}

TEST(Random, StreamsAreDeterministicAndDistinct) {
  Rng a = make_stream(1, 2, 0), b = make_stream(1, 2, 0), c = make_stream(1, 2, 1),
      d = make_stream(1, 3, 0);
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
}

TEST(Random, UniformRanges) {
  Rng rng = make_stream(3, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open0(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
    ASSERT_LT(uniform_below(7, rng), 7u);
  }
}

TEST(Random, GeometricMoments) {
  Rng rng = make_stream(4, 0);
  const double x = 0.1 / 1.1;
  const int n = 2'000'000;
  const auto m = moments(n, [&] { return sample_geometric(x, rng); });
  const double mean = x / (1 - x), var = x / ((1 - x) * (1 - x));
  EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(var / n));
  EXPECT_EQ(sample_geometric(0.0, rng), 0u);
}

TEST(Random, FailuresBeforeSuccess) {
  Rng rng = make_stream(5, 0);
  const int n = 1'000'000;
  const double q = 0.01;
  const auto m = moments(n, [&] { return sample_failures_before_success(q, rng); });
  const double mean = (1 - q) / q, var = (1 - q) / (q * q);
  EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(var / n));
  EXPECT_EQ(sample_failures_before_success(0.0, rng), UINT64_MAX);
  EXPECT_EQ(sample_failures_before_success(1.0, rng), 0u);
}

TEST(Random, BinomialBothRegimes) {
  Rng rng = make_stream(6, 0);
  for (std::uint64_t trials : {10ull, 1000ull}) {
    const int n = 500'000;
    const double p = 0.3;
    const auto m = moments(n, [&] { return sample_binomial(trials, p, rng); });
    const double mean = trials * p, var = trials * p * (1 - p);
    EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(var / n)) << trials;
    EXPECT_NEAR(m.var, var, 0.02 * var) << trials;
  }
  EXPECT_EQ(sample_binomial(12, 1.0, rng), 12u);
  EXPECT_EQ(sample_binomial(12, 0.0, rng), 0u);
}

TEST(Random, PoissonBothRegimes) {
  Rng rng = make_stream(7, 0);
  for (double mean : {0.3, 80.0}) {
    const int n = 500'000;
    const auto m = moments(n, [&] { return sample_poisson(mean, rng); });
    EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR(m.var, mean, 0.02 * mean) << mean;
  }
  EXPECT_EQ(sample_poisson(0.0, rng), 0u);
}

TEST(Random, ZeroTruncatedPoisson) {
  Rng rng = make_stream(8, 0);
  for (double mean : {1e-4, 0.5, 3.0}) {
    const int n = 400'000;
    std::uint64_t zeros = 0;
    const auto m = moments(n, [&] {
      const auto v = sample_zero_truncated_poisson(mean, rng);
      zeros += v == 0;
      return v;
    });
    EXPECT_EQ(zeros, 0u);
    const double expect = mean / -std::expm1(-mean);
    const double ex2 = (mean + mean * mean) / -std::expm1(-mean);
    EXPECT_NEAR(m.mean, expect, 4.0 * std::sqrt((ex2 - expect * expect) / n) + 1e-12) << mean;
  }
}

}  // namespace
}  // namespace phlab
