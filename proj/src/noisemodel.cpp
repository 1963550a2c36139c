#include "phlab/noisemodel.hpp"

#include <cmath>

#include <fmt/format.h>

namespace phlab::noise {

namespace {

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("{} must be finite and >= 0 (got {})", name, v));
  }
}

}  // namespace

double mix_cross(double g2_cross_in, double zeta) {
  require_non_negative(g2_cross_in, "g2_cross_in");
  require_non_negative(zeta, "zeta");
  return (g2_cross_in * zeta + 1.0) / (zeta + 1.0);
}

double mix_auto(double g2_signal_auto, double g2_noise, double zeta) {
  require_non_negative(g2_signal_auto, "g2_signal_auto");
  require_non_negative(g2_noise, "g2_noise");
  require_non_negative(zeta, "zeta");
  const double norm = (1.0 + zeta) * (1.0 + zeta);
  return (zeta * zeta * g2_signal_auto + g2_noise + 2.0 * zeta) / norm;
}

double mix_heralded_ss(double g2_ss_heralded_in, double g2_ss, double g2_cross_in,
                       double g2_cross_out, double zeta) {
  require_non_negative(g2_ss_heralded_in, "g2_ss_heralded_in");
  require_non_negative(g2_ss, "g2_ss");
  require_non_negative(g2_cross_in, "g2_cross_in");
  require_non_negative(zeta, "zeta");
  if (g2_cross_out == 0.0) throw DivisionByZero("mix_heralded_ss: g2_cross_out is zero");
  require_non_negative(g2_cross_out, "g2_cross_out");
  const double ratio = g2_cross_in / g2_cross_out;
  return g2_ss_heralded_in * ratio * ratio * zeta / (zeta + 1.0) +
         g2_ss / (g2_cross_out * g2_cross_out) / (zeta + 1.0);
}

double mix_heralded_ss(double g2_ss_heralded_in, double g2_ss, double g2_cross_in,
                       double zeta) {
  return mix_heralded_ss(g2_ss_heralded_in, g2_ss, g2_cross_in, mix_cross(g2_cross_in, zeta),
                         zeta);
}

NoiseSolution solve_zeta_gnoise(const ObservedCorrelations& o) {
  require_non_negative(o.g2_signal_auto, "g2_signal_auto");
  require_non_negative(o.g2_auto_out, "g2_auto_out");
  if (!(o.g2_cross_in > 1.0)) {
    throw NoSolution(fmt::format("g2_cross_in = {} must exceed 1", o.g2_cross_in));
  }
  if (!(o.g2_cross_out > 1.0 && o.g2_cross_out < o.g2_cross_in)) {
    throw NoSolution(fmt::format("g2_cross_out = {} must lie strictly between 1 and {}",
                                 o.g2_cross_out, o.g2_cross_in));
  }
  NoiseSolution sol;
  sol.zeta = (o.g2_cross_out - 1.0) / (o.g2_cross_in - o.g2_cross_out);
  const double z = sol.zeta;
  sol.g2_noise = (1.0 + z) * (1.0 + z) * o.g2_auto_out - z * z * o.g2_signal_auto - 2.0 * z;
  sol.negative_noise = sol.g2_noise < 0.0;
  return sol;
}

void NoiseMix::validate() const {
  require_non_negative(zeta, "zeta");
  require_non_negative(g2_noise, "g2_noise");
  require_non_negative(g2_signal_auto, "g2_signal_auto");
  require_non_negative(g2_signal_auto_heralded, "g2_signal_auto_heralded");
  require_non_negative(g2_cross_in, "g2_cross_in");
  require_non_negative(g2_ss, "g2_ss");
  require_non_negative(g2_ss_heralded_in, "g2_ss_heralded_in");
}

ScenarioPrediction predict_scenario(const NoiseMix& base, const ScenarioSpec& spec) {
  base.validate();
  if (!(spec.zeta_multiplier > 0.0) || !std::isfinite(spec.zeta_multiplier)) {
    throw std::invalid_argument(
        fmt::format("scenario '{}': multiplier must be > 0", spec.label));
  }
  ScenarioPrediction p;
  p.label = spec.label;
  p.zeta = base.zeta * spec.zeta_multiplier;
  p.g2_noise = base.g2_noise;
  p.g2_cross_out = mix_cross(base.g2_cross_in, p.zeta);
  p.g2_ss_given_ast =
      mix_heralded_ss(base.g2_ss_heralded_in, base.g2_ss, base.g2_cross_in, p.g2_cross_out, p.zeta);
  p.g2_ast_ast_given_s = mix_auto(base.g2_signal_auto_heralded, base.g2_noise,
                                  heralded_zeta(base.g2_cross_in, p.zeta));
  return p;
}

std::vector<ScenarioSpec> default_scenarios() {
  return {{1.0, "baseline"}, {10.0, "collection_x10"}, {1.25, "polarization_selection"}};
}

}  // namespace phlab::noise
