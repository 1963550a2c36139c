#include "phlab/estimation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace phlab::estimation {

EfficiencyEstimate estimate_efficiencies(double p_s, double p_v, double p_sv) {
  if (!(p_s > 0.0 && p_s <= 1.0) || !(p_v > 0.0 && p_v <= 1.0)) {
    throw InvalidProbabilities(
        fmt::format("singles probabilities must lie in (0, 1] (p_s={}, p_v={})", p_s, p_v));
  }
  if (!(p_sv > 0.0) || p_sv > std::min(p_s, p_v)) {
    throw InvalidProbabilities(
        fmt::format("coincidence probability {} must lie in (0, min(p_s, p_v)]", p_sv));
  }
  EfficiencyEstimate e;
  e.eta_asv = p_sv / p_s;
  e.eta_s = p_sv / p_v;
  e.p_ex = p_s * p_v / p_sv;
  e.out_of_range = e.p_ex > 1.0 || e.eta_s > 1.0 || *e.eta_asv > 1.0;
  return e;
}

double estimate_eta_ast(double p_s, double p_st) {
  if (!(p_s > 0.0) || !(p_st >= 0.0) || p_st > p_s) {
    throw InvalidProbabilities(fmt::format("need 0 <= p_st <= p_s, p_s > 0 (p_s={}, p_st={})",
                                           p_s, p_st));
  }
  return p_st / p_s;
}

EfficiencyEstimate estimate_from_counts(const CountAggregate& agg) {
  const double trials = static_cast<double>(agg.trials());
  if (trials <= 0.0) throw InvalidProbabilities("aggregate has no trials");
  auto prob = [&](std::uint64_t n) { return static_cast<double>(n) / trials; };
  const double p_s = prob(agg.singles(kModeS));
  const double p_v = prob(agg.singles(kModeAsv));
  const double p_t = prob(agg.singles(kModeAst));
  const double p_sv = prob(agg.coincidences({kModeS, kModeAsv}));
  const double p_st = prob(agg.coincidences({kModeS, kModeAst}));

  EfficiencyEstimate e;
  if (p_v > 0.0) {
    e = estimate_efficiencies(p_s, p_v, p_sv);
  } else if (p_t > 0.0) {
    e = estimate_efficiencies(p_s, p_t, p_st);
    e.eta_asv.reset();
  } else {
    throw InvalidProbabilities("no anti-Stokes detections in aggregate");
  }
  if (p_t > 0.0) {
    e.eta_ast = estimate_eta_ast(p_s, p_st);
    e.out_of_range = e.out_of_range || *e.eta_ast > 1.0;
  }
  return e;
}

double collection_probability(double eta_asv, double detector_qe, double filter_transmittance) {
  if (detector_qe == 0.0 || filter_transmittance == 0.0) {
    throw DivisionByZero("detector efficiency and filter transmittance must be non-zero");
  }
  for (double f : {eta_asv, detector_qe, filter_transmittance}) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw InvalidProbabilities(fmt::format("factor {} must lie in (0, 1]", f));
    }
  }
  return eta_asv / (detector_qe * filter_transmittance);
}

double without_loss(double eta, double loss) {
  if (!(loss >= 0.0 && loss < 1.0)) {
    throw InvalidProbabilities(fmt::format("loss must lie in [0, 1) (got {})", loss));
  }
  return eta / (1.0 - loss);
}

}  // namespace phlab::estimation
