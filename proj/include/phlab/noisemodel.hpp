#pragma once

// How additive, statistically independent converter noise degrades the
// correlation functions of the converted anti-Stokes mode.
//
// zeta is the ratio of the mean anti-Stokes photon number to the equivalent
// input noise, both referred to the converter input. The conversion
// efficiency multiplies signal and noise alike and therefore cancels in
// every normalised correlation function.

#include <stdexcept>
#include <string>
#include <vector>

namespace phlab::noise {

class NoSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivisionByZero : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cross correlation S x converted-AS: (g_in * zeta + 1) / (zeta + 1).
double mix_cross(double g2_cross_in, double zeta);

/// Autocorrelation of the converted mode:
/// (zeta^2 g_signal + g_noise + 2 zeta) / (1 + zeta)^2.
double mix_auto(double g2_signal_auto, double g2_noise, double zeta);

/// Stokes autocorrelation heralded by the converted mode, with the
/// converted cross correlation supplied (typically the observed one).
double mix_heralded_ss(double g2_ss_heralded_in, double g2_ss, double g2_cross_in,
                       double g2_cross_out, double zeta);

/// Same, with the converted cross correlation computed by mix_cross.
double mix_heralded_ss(double g2_ss_heralded_in, double g2_ss, double g2_cross_in,
                       double zeta);

/// Zeta seen by the converted mode once a Stokes detection has heralded it.
inline double heralded_zeta(double g2_cross_in, double zeta) { return g2_cross_in * zeta; }

struct ObservedCorrelations {
  double g2_cross_in = 0.0;     // S x AS before conversion
  double g2_cross_out = 0.0;    // S x AS after conversion
  double g2_signal_auto = 0.0;  // AS autocorrelation before conversion
  double g2_auto_out = 0.0;     // AS autocorrelation after conversion
};

struct NoiseSolution {
  double zeta = 0.0;
  double g2_noise = 0.0;
  bool negative_noise = false;  // inverted g2_noise < 0: data inconsistent with the model
};

/// Inverts mix_cross for zeta, then mix_auto for g2_noise.
NoiseSolution solve_zeta_gnoise(const ObservedCorrelations& observed);

struct NoiseMix {
  double zeta = 0.0;
  double g2_noise = 1.0;
  double g2_signal_auto = 0.0;           // AS autocorrelation, unheralded
  double g2_signal_auto_heralded = 0.0;  // AS autocorrelation heralded by S
  double g2_cross_in = 0.0;              // S x AS before conversion
  double g2_ss = 0.0;                    // S autocorrelation, unheralded
  double g2_ss_heralded_in = 0.0;        // S autocorrelation heralded by AS

  void validate() const;
};

struct ScenarioSpec {
  double zeta_multiplier = 1.0;
  std::string label;
};

struct ScenarioPrediction {
  std::string label;
  double zeta = 0.0;
  double g2_noise = 0.0;
  double g2_cross_out = 0.0;
  double g2_ss_given_ast = 0.0;
  double g2_ast_ast_given_s = 0.0;
};

/// Scales zeta and re-evaluates the heralded autocorrelations after
/// conversion. The converted-mode autocorrelation heralded by S uses mix_auto
/// with zeta replaced by heralded_zeta(); that substitution is asserted
/// rather than derived, so treat it as an approximation.
ScenarioPrediction predict_scenario(const NoiseMix& base, const ScenarioSpec& spec);

std::vector<ScenarioSpec> default_scenarios();

}  // namespace phlab::noise
