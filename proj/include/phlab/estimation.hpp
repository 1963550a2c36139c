#pragma once

// Back-of-envelope inference of the excitation probability and the path
// transmittances from detection probabilities, using the linearised
// two-mode-squeezed relations
//
//   p_s = p_ex eta_s,   p_v = p_ex eta_asv,   p_sv = p_ex eta_s eta_asv.
//
// Higher orders in p_ex are neglected, which biases the estimates upward in
// eta and downward in p_ex as p_ex grows.

#include <optional>
#include <stdexcept>

#include "phlab/counts.hpp"

namespace phlab::estimation {

class InvalidProbabilities : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DivisionByZero : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EfficiencyEstimate {
  double p_ex = 0.0;
  double eta_s = 0.0;
  std::optional<double> eta_asv;
  std::optional<double> eta_ast;
  std::optional<double> collection_probability;
  bool out_of_range = false;  // some estimate exceeds 1
};

EfficiencyEstimate estimate_efficiencies(double p_s, double p_v, double p_sv);

/// eta_ast = p_st / p_s, the same relation applied to the converted path.
double estimate_eta_ast(double p_s, double p_st);

/// Uses S x AS(780) when those channels clicked, and adds eta_ast when the
/// converted channels clicked. With only converted channels present, p_ex
/// and eta_s come from S x AS(1522).
EfficiencyEstimate estimate_from_counts(const CountAggregate& agg);

/// Photon collection probability after removing detector and filter losses.
double collection_probability(double eta_asv, double detector_qe, double filter_transmittance);

/// Transmittance the path would have without a fractional signal loss.
double without_loss(double eta, double loss);

}  // namespace phlab::estimation
