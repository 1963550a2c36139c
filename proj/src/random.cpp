#include "phlab/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phlab {

Rng make_stream(std::uint64_t master_seed, std::uint64_t batch, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(batch),
                    static_cast<std::uint32_t>(batch >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

std::uint64_t uniform_below(std::uint64_t n, Rng& rng) {
  // Rejection removes the modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

std::uint64_t sample_geometric(double ratio, Rng& rng) {
  if (ratio <= 0.0) return 0;
  if (ratio >= 1.0) throw std::invalid_argument("geometric ratio must be < 1");
  return static_cast<std::uint64_t>(std::floor(std::log(uniform_open0(rng)) / std::log(ratio)));
}

std::uint64_t sample_failures_before_success(double q, Rng& rng) {
  if (q <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  if (q >= 1.0) return 0;
  const double k = std::floor(std::log(uniform_open0(rng)) / std::log1p(-q));
  if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(k);
}

std::uint64_t sample_binomial(std::uint64_t n, double p, Rng& rng) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (n > 64) {
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(rng);
  }
  std::uint64_t k = 0;
  for (std::uint64_t i = 0; i < n; ++i) k += uniform01(rng) < p ? 1 : 0;
  return k;
}

std::uint64_t sample_poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  if (mean > 30.0) {
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
  }
  // Knuth: multiply uniforms until the product drops below exp(-mean).
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = uniform01(rng);
  while (prod >= limit) {
    ++k;
    prod *= uniform01(rng);
  }
  return k;
}

std::uint64_t sample_zero_truncated_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) throw std::invalid_argument("zero-truncated Poisson needs mean > 0");
  if (mean > 30.0) {
    std::uint64_t k;
    do {
      k = sample_poisson(mean, rng);
    } while (k == 0);
    return k;
  }
  // Inverse CDF over k >= 1 with weights mean^k / k! normalised by expm1(mean).
  double u = uniform01(rng) * std::expm1(mean);
  double term = mean;
  std::uint64_t k = 1;
  while (u >= term && k < 1000) {
    u -= term;
    ++k;
    term *= mean / static_cast<double>(k);
  }
  return k;
}

}  // namespace phlab
