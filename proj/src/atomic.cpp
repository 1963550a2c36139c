#include "phlab/atomic.hpp"

#include <cmath>

#include <fmt/format.h>

namespace phlab::atomic {

namespace {

const std::vector<int> kF2{2, 1, 0, -1, -2};
const std::vector<int> kF1{1, 0, -1};

Eigen::MatrixXd decay_to_gb(double sign) {
  const double a = std::sqrt(1.0 / 4.0);
  const double b = std::sqrt(1.0 / 24.0);
  const double c = std::sqrt(1.0 / 8.0);
  Eigen::MatrixXd m(3, 5);
  // clang-format off
  m << a, 0.0, sign * b, 0.0,      0.0,
       0.0, c,  0.0,     sign * c, 0.0,
       0.0, 0.0, b,      0.0,      sign * a;
  // clang-format on
  return m;
}

}  // namespace

HyperfineMatrices build_matrices() {
  const double a = std::sqrt(1.0 / 12.0);
  const double b = std::sqrt(1.0 / 8.0);
  Eigen::MatrixXd x22(5, 5);
  // clang-format off
  x22 << 0.0, a,   0.0, 0.0, 0.0,
         a,   0.0, b,   0.0, 0.0,
         0.0, b,   0.0, b,   0.0,
         0.0, 0.0, b,   0.0, a,
         0.0, 0.0, 0.0, a,   0.0;
  // clang-format on

  HyperfineMatrices m;
  m.excite_from_ga = {"X_2'2", x22, kF2, kF2};
  m.decay_to_gb_plus = {"X+_12'", decay_to_gb(+1.0), kF1, kF2};
  m.decay_to_gb_minus = {"X-_12'", decay_to_gb(-1.0), kF1, kF2};
  m.excite_from_gb = {"X+_2'1", m.decay_to_gb_plus.entries.transpose(), kF2, kF1};
  m.decay_to_ga = {"X_22'", x22, kF2, kF2};
  return m;
}

HyperfineMatrices scaled(HyperfineMatrices m, double factor) {
  for (TransitionMatrix* t : {&m.excite_from_ga, &m.decay_to_gb_plus, &m.decay_to_gb_minus,
                              &m.excite_from_gb, &m.decay_to_ga}) {
    t->entries *= factor;
  }
  return m;
}

TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b) {
  if (a.cols() != b.rows() || a.col_basis != b.row_basis) {
    throw DimensionMismatch(fmt::format("cannot multiply {} ({}x{}) by {} ({}x{})", a.name,
                                        a.rows(), a.cols(), b.name, b.rows(), b.cols()));
  }
  return {a.name + " " + b.name, a.entries * b.entries, a.row_basis, b.col_basis};
}

TransitionMatrix path_matrix(AntiStokesPolarization pol, const HyperfineMatrices& m) {
  const TransitionMatrix& to_gb = pol == AntiStokesPolarization::horizontal
                                      ? m.decay_to_gb_plus
                                      : m.decay_to_gb_minus;
  TransitionMatrix x = multiply(to_gb, m.excite_from_ga);
  x = multiply(m.excite_from_gb, x);
  x = multiply(m.decay_to_ga, x);
  x.name = pol == AntiStokesPolarization::horizontal ? "X_H" : "X_V";
  return x;
}

PolarizationResult polarization_ratio_and_loss(const HyperfineMatrices& m) {
  const Eigen::MatrixXd xh = path_matrix(AntiStokesPolarization::horizontal, m).entries;
  const Eigen::MatrixXd xv = path_matrix(AntiStokesPolarization::vertical, m).entries;
  PolarizationResult r;
  r.h_weight = (xh.transpose() * xh).trace();
  r.v_weight = (xv.transpose() * xv).trace();
  r.ratio = r.h_weight / r.v_weight;
  r.loss = r.v_weight / (r.h_weight + r.v_weight);
  return r;
}

}  // namespace phlab::atomic
