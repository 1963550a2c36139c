#pragma once

// Run configuration: an INI-style text file with the sections
//
//   [source]     mean_pairs | p_ex, eta_s, eta_asv, eta_conv, noise_mean | zeta,
//                qfc, polarization_loss
//   [detectors]  dark_Ds1 .. dark_Dt2 (mean dark counts per window),
//                nuisance_rate, nuisance_times_ns (comma separated)
//   [windows]    s_offset_ns, s_width_ns, as_offset_ns, as_width_ns, histogram_bin_ns
//   [rng]        seed, batch_size, engine (direct | sparse), trials
//   [scenarios]  <label> = <zeta multiplier>, one per line, order kept
//   [io]         output_dir, via_timetags
//
// '#' or ';' start a comment line. Unknown sections or keys are errors.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "phlab/montecarlo.hpp"
#include "phlab/noisemodel.hpp"
#include "phlab/timetag.hpp"

namespace phlab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string file, std::size_t line, const std::string& message);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }  // 0 when not tied to a line

 private:
  std::string file_;
  std::size_t line_;
};

struct RunConfig {
  mc::SourceParams source;
  WindowConfig windows;
  mc::RngPlan rng;
  mc::Engine engine = mc::Engine::direct;
  std::uint64_t trials = std::uint64_t{kSequencesPerCycle} * 1000;
  double nuisance_rate = 0.0;
  std::vector<std::uint32_t> nuisance_times_ns{120, 210, 860};
  std::vector<noise::ScenarioSpec> scenarios;
  std::string output_dir = ".";
  bool via_timetags = false;

  mc::EmissionConfig emission() const;

  /// Fully resolved key=value listing; stable for equal configurations.
  std::string canonical() const;
  /// SHA-256 of canonical(), lowercase hex.
  std::string hash() const;
};

RunConfig parse_config(std::istream& in, const std::string& file_name = "<config>");
RunConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace phlab
