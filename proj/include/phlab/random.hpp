#pragma once

#include <cstdint>
#include <random>

namespace phlab {

using Rng = std::mt19937_64;

/// Deterministic child generator for (master seed, batch index, stream id).
/// Streams separate independent uses inside one batch (physics, timestamps,
/// nuisance tags) so that enabling one never perturbs another.
Rng make_stream(std::uint64_t master_seed, std::uint64_t batch, std::uint64_t stream = 0);

/// Uniform double on (0, 1].
inline double uniform_open0(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform double on [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(double p, Rng& rng) { return p > 0.0 && uniform01(rng) < p; }

/// Uniform integer on [0, n), n > 0.
std::uint64_t uniform_below(std::uint64_t n, Rng& rng);

/// P(n) = (1 - ratio) ratio^n, n = 0, 1, ...
std::uint64_t sample_geometric(double ratio, Rng& rng);

/// Number of failed Bernoulli(q) trials before the first success. Returns
/// UINT64_MAX when q == 0.
std::uint64_t sample_failures_before_success(double q, Rng& rng);

std::uint64_t sample_binomial(std::uint64_t n, double p, Rng& rng);
std::uint64_t sample_poisson(double mean, Rng& rng);

/// Poisson(mean) conditioned on a non-zero outcome; mean > 0.
std::uint64_t sample_zero_truncated_poisson(double mean, Rng& rng);

}  // namespace phlab
