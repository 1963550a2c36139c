#pragma once

// Command-line front end. `run` is the whole program minus process setup so
// tests can drive it in-process.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "phlab/correlation.hpp"
#include "phlab/noisemodel.hpp"

namespace phlab::cli {

class IoError : public std::runtime_error {
 public:
  IoError(std::string file, const std::string& message);
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

/// args excludes the program name. Returns the process exit status; on
/// failure a single JSON object describing the error is written to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Noise-model inputs from a measured set: zeta and g2_noise are inverted
/// from the cross and unheralded autocorrelations, the rest copied across.
noise::NoiseMix noise_mix_from(const CorrelationSet& set);

std::string version();

}  // namespace phlab::cli
