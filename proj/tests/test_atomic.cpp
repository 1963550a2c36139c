#include <cmath>

#include <gtest/gtest.h>

#include "phlab/atomic.hpp"
#include "phlab/random.hpp"

namespace phlab::atomic {
namespace {

TEST(Matrices, PrintedEntries) {
  const auto m = build_matrices();
  EXPECT_NEAR(m.excite_from_ga.entries(0, 1), std::sqrt(1.0 / 12.0), 1e-15);
  EXPECT_NEAR(m.excite_from_ga.entries(0, 1), 0.288675, 1e-6);
  EXPECT_NEAR(m.excite_from_ga.entries(1, 2), std::sqrt(1.0 / 8.0), 1e-15);
  EXPECT_NEAR(m.decay_to_gb_plus.entries(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(m.decay_to_gb_plus.entries(0, 2), std::sqrt(1.0 / 24.0), 1e-15);
  EXPECT_NEAR(m.decay_to_gb_minus.entries(0, 2), -std::sqrt(1.0 / 24.0), 1e-15);
  EXPECT_NEAR(m.decay_to_gb_minus.entries(2, 4), -0.5, 1e-15);
  EXPECT_EQ(m.excite_from_ga.row_basis, (std::vector<int>{2, 1, 0, -1, -2}));
  EXPECT_EQ(m.decay_to_gb_plus.row_basis, (std::vector<int>{1, 0, -1}));
}

TEST(Matrices, StatedSymmetries) {
  const auto m = build_matrices();
  EXPECT_EQ((m.decay_to_ga.entries - m.decay_to_ga.entries.transpose()).norm(), 0.0);
  EXPECT_EQ((m.excite_from_gb.entries - m.decay_to_gb_plus.entries.transpose()).norm(), 0.0);
  EXPECT_EQ((m.decay_to_ga.entries - m.excite_from_ga.entries).norm(), 0.0);
}

TEST(PathMatrix, ShapeAndBounds) {
  for (auto pol : {AntiStokesPolarization::horizontal, AntiStokesPolarization::vertical}) {
    const auto x = path_matrix(pol);
    EXPECT_EQ(x.rows(), 5);
    EXPECT_EQ(x.cols(), 5);
    EXPECT_TRUE(x.entries.allFinite());
    EXPECT_LE(x.entries.cwiseAbs().maxCoeff(), 1.0);
  }
  EXPECT_NEAR(path_matrix(AntiStokesPolarization::horizontal).entries.cwiseAbs().maxCoeff(),
              0.0625, 1e-15);
}

TEST(PathMatrix, DimensionMismatch) {
  const auto m = build_matrices();
  EXPECT_THROW(multiply(m.excite_from_ga, m.decay_to_gb_plus), DimensionMismatch);
}

TEST(Polarization, RatioAndLoss) {
  const auto r = polarization_ratio_and_loss();
  EXPECT_NEAR(r.ratio, 33.0 / 8.0, 1e-12);
  EXPECT_NEAR(r.loss, 8.0 / 41.0, 1e-12);
  EXPECT_NEAR(r.loss, loss_from_ratio(r.ratio), 1e-12);
  EXPECT_NEAR(r.h_weight, 0.0143229166666667, 1e-15);
  EXPECT_NEAR(r.v_weight, 0.00347222222222222, 1e-15);
}

TEST(Polarization, ScaleInvariant) {
  const auto base = polarization_ratio_and_loss();
  for (double c : {0.5, 2.0, 4.0}) {  // powers of two keep the arithmetic exact
    EXPECT_EQ(polarization_ratio_and_loss(scaled(build_matrices(), c)).ratio, base.ratio);
  }
  EXPECT_NEAR(polarization_ratio_and_loss(scaled(build_matrices(), 3.7)).ratio, base.ratio, 1e-12);
}

// Sublevel sampling: a uniformly drawn initial m_F, weight sum_i |X_ij|^2
// accumulated per path.
TEST(Polarization, SublevelMonteCarlo) {
  const Eigen::MatrixXd xh = path_matrix(AntiStokesPolarization::horizontal).entries;
  const Eigen::MatrixXd xv = path_matrix(AntiStokesPolarization::vertical).entries;
  Rng rng = make_stream(2, 0);
  const int n = 1'000'000;
  double h = 0, v = 0, hh = 0, vv = 0, hv = 0;
  for (int k = 0; k < n; ++k) {
    const auto j = static_cast<Eigen::Index>(uniform_below(5, rng));
    const double wh = xh.col(j).squaredNorm();
    const double wv = xv.col(j).squaredNorm();
    h += wh;
    v += wv;
    hh += wh * wh;
    vv += wv * wv;
    hv += wh * wv;
  }
  h /= n, v /= n, hh /= n, vv /= n, hv /= n;
  const double ratio = h / v;
  const double rel2 = ((hh - h * h) / (h * h) + (vv - v * v) / (v * v) - 2 * (hv - h * v) / (h * v)) / n;
  EXPECT_NEAR(ratio, 33.0 / 8.0, 3.0 * ratio * std::sqrt(rel2));
}

}  // namespace
}  // namespace phlab::atomic
