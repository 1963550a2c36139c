#pragma once

// Trial-by-trial simulation of the heralded photon-pair experiment.
//
// One trial is one write slot. The atomic ensemble emits n Stokes /
// anti-Stokes pairs with the thermal (two-mode squeezed) law
// P(n) = (1 - x) x^n, x = mean_pairs / (1 + mean_pairs). Each mode is
// thinned by its overall transmittance; with the converter enabled the
// anti-Stokes photons are joined by Poissonian noise photons and the sum is
// thinned by the conversion efficiency. Every mode ends on a 50/50 splitter
// with a threshold detector behind each port.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "phlab/channels.hpp"
#include "phlab/counts.hpp"
#include "phlab/random.hpp"
#include "phlab/timetag.hpp"

namespace phlab::mc {

struct SourceParams {
  double mean_pairs = 0.1;
  double eta_s = 1.0;    // Stokes path incl. retrieval, filter and detector efficiency
  double eta_asv = 1.0;  // anti-Stokes path up to the 780 nm detectors / converter input
  double eta_conv = 1.0;
  double noise_mean = 0.0;  // equivalent input noise photons per anti-Stokes window
  std::array<double, kChannelCount> dark_rate{};  // mean dark counts per window
  bool qfc = false;                // route anti-Stokes photons through the converter
  bool polarization_loss = false;  // apply the sublevel polarization loss to eta_asv

  /// Probability of at least one pair, 1 - P(n = 0).
  double excitation_probability() const { return pair_ratio(); }
  double pair_ratio() const { return mean_pairs / (1.0 + mean_pairs); }
  double effective_eta_asv() const;
  /// Efficiency from emission to the anti-Stokes splitter that is in use.
  double anti_stokes_detection_efficiency() const;
  /// Signal-to-noise photon ratio at the converter input.
  double zeta() const;
  ChannelSet present_channels() const;
  void validate() const;  // throws std::invalid_argument
};

double mean_pairs_for_excitation(double p_ex);
double noise_mean_for_zeta(const SourceParams& p, double zeta);

struct PairNumbers {
  std::uint64_t n_s = 0;
  std::uint64_t n_as = 0;
};

PairNumbers sample_pair_numbers(const SourceParams& p, Rng& rng);
std::uint64_t apply_loss(std::uint64_t n, double eta, Rng& rng);
/// Adds Poisson(noise_mean) photons, then thins signal and noise together by
/// eta_conv. Returns the photon number at 1522 nm.
std::uint64_t add_conversion_noise(std::uint64_t n_as, const SourceParams& p, Rng& rng);

struct ArmClicks {
  bool a = false;
  bool b = false;
};

/// 50/50 split of n photons followed by threshold detection with Poissonian
/// dark counts (mean per window) on each arm.
ArmClicks split_and_detect(std::uint64_t n, double dark_a, double dark_b, Rng& rng);

struct TrialOutcome {
  std::uint64_t n_pairs = 0;
  std::uint64_t n_s_at_splitter = 0;
  std::uint64_t n_as_at_splitter = 0;  // 780 nm or 1522 nm, whichever path is in use
  ChannelSet clicks;
};

TrialOutcome simulate_trial(const SourceParams& p, Rng& rng);

/// Photon number reaching the anti-Stokes splitter in a trial whose Stokes
/// detectors clicked; trials without a herald are discarded.
std::uint64_t sample_heralded_photons(const SourceParams& p, Rng& rng);

enum class Engine {
  direct,  // one trial at a time through the operations above
  sparse,  // skips ahead to the next slot with any click; same distribution
};

struct RngPlan {
  std::uint64_t master_seed = 1;
  std::uint64_t batch_size = std::uint64_t{kSequencesPerCycle} * 1000;
};

struct EmissionConfig {
  WindowConfig windows;
  double nuisance_rate = 0.0;  // stray tags per channel per slot, outside the windows
  std::vector<std::uint32_t> nuisance_times_ns{120, 210, 860};

  void validate() const;
};

struct ExperimentOptions {
  Engine engine = Engine::direct;
  std::optional<EmissionConfig> emission;
  unsigned threads = 0;  // 0: PHLAB_THREADS or hardware concurrency
};

struct BatchResult {
  CountAggregate aggregate;
  std::vector<TimeTagRecord> records;
};

std::uint64_t batch_count(std::uint64_t n_trials, const RngPlan& plan);

/// Trials [batch * batch_size, min((batch + 1) * batch_size, n_trials)).
BatchResult run_batch(const SourceParams& p, std::uint64_t n_trials, const RngPlan& plan,
                      std::uint64_t batch, const ExperimentOptions& opts = {});

struct ExperimentResult {
  CountAggregate aggregate;
  std::vector<CountAggregate> batch_aggregates;
  std::vector<TimeTagRecord> records;  // only with emission enabled, slot-ordered
};

ExperimentResult run_experiment(const SourceParams& p, std::uint64_t n_trials,
                                const RngPlan& plan, const ExperimentOptions& opts = {});

/// Worker count: the request if non-zero, else hardware concurrency, capped
/// by PHLAB_THREADS when set.
unsigned worker_threads(unsigned requested);

}  // namespace phlab::mc
