#pragma once

// Hong-Ou-Mandel visibility of two independent, identical sources mixed on
// a 50/50 splitter, assuming perfect mode overlap at zero delay and no stray
// photons. With normal-ordered moments <:n^2:> = <n(n-1)>:
//
//   P_0   / eta = (<:n1^2:> + <:n2^2:>) / 4
//   P_inf / eta = (<:n1^2:> + <:n2^2:> + 2 <n1><n2>) / 4
//   V = 1 - P_0 / P_inf = 1 / (1 + g2)

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "phlab/montecarlo.hpp"
#include "phlab/random.hpp"

namespace phlab::hom {

class DegenerateSource : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HomResult {
  double p0 = 0.0;  // up to the detector efficiency product
  double p0_err = 0.0;
  double p_inf = 0.0;
  double p_inf_err = 0.0;
  double visibility = 0.0;
  double visibility_err = 0.0;
  std::uint64_t trials = 0;
};

double visibility_from_g2(double g2);

using PhotonSampler = std::function<std::uint64_t(Rng&)>;

PhotonSampler fock_sampler(std::uint64_t n);
PhotonSampler thermal_sampler(double mean);
PhotonSampler poisson_sampler(double mean);
/// Converted (or 780 nm) anti-Stokes photons heralded by a Stokes click.
PhotonSampler heralded_sampler(const mc::SourceParams& p);

/// Draws n_trials independent pairs (n1, n2) and evaluates the visibility
/// from sample moments. Batches follow the Monte Carlo RngPlan so results
/// do not depend on the thread count.
HomResult visibility_from_moments(const PhotonSampler& sampler, std::uint64_t n_trials,
                                  const mc::RngPlan& plan, unsigned threads = 0);

}  // namespace phlab::hom
