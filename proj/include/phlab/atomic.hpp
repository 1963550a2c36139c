#pragma once

// Hyperfine dipole transition matrices for the Raman write/read paths on
// the 87Rb D2 line (F=2 <-> F'=2 <-> F=1), and the resulting polarization
// selection loss of the heralded anti-Stokes photons.
//
// Entries are relative dipole matrix elements, fixed up to one common
// constant factor (set to 1 here); only ratios are physical.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace phlab::atomic {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TransitionMatrix {
  std::string name;
  Eigen::MatrixXd entries;
  std::vector<int> row_basis;  // m_F of the final level, descending
  std::vector<int> col_basis;  // m_F of the initial level, descending

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

struct HyperfineMatrices {
  TransitionMatrix excite_from_ga;     // F=2 -> F'=2, sigma transitions
  TransitionMatrix decay_to_gb_plus;   // F'=2 -> F=1, detected polarization sum
  TransitionMatrix decay_to_gb_minus;  // F'=2 -> F=1, orthogonal polarization
  TransitionMatrix excite_from_gb;     // F=1 -> F'=2 (transpose of decay_to_gb_plus)
  TransitionMatrix decay_to_ga;        // F'=2 -> F=2 (equal to excite_from_ga)
};

HyperfineMatrices build_matrices();

/// Multiplies every matrix by `factor` (the overall constant is arbitrary).
HyperfineMatrices scaled(HyperfineMatrices m, double factor);

/// a * b with basis bookkeeping; throws DimensionMismatch.
TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b);

enum class AntiStokesPolarization { horizontal, vertical };

/// Write-then-read transition matrix from the initial F=2 sublevel to the
/// final F=2 sublevel, for a detected anti-Stokes polarization:
/// decay_to_ga * excite_from_gb * decay_to_gb_{plus|minus} * excite_from_ga.
TransitionMatrix path_matrix(AntiStokesPolarization pol,
                             const HyperfineMatrices& m = build_matrices());

struct PolarizationResult {
  double h_weight = 0.0;  // tr(X_H^T X_H)
  double v_weight = 0.0;  // tr(X_V^T X_V)
  double ratio = 0.0;     // H/V, 33/8 for the matrices above
  double loss = 0.0;      // V/(H+V), 8/41
};

/// Weights for a maximally mixed initial sublevel distribution.
PolarizationResult polarization_ratio_and_loss(const HyperfineMatrices& m = build_matrices());

inline double loss_from_ratio(double ratio) { return 1.0 / (1.0 + ratio); }

}  // namespace phlab::atomic
