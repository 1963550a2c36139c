#include "phlab/hom.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include <fmt/format.h>

namespace phlab::hom {

namespace {

// Per-trial vector: (n1(n1-1), n2(n2-1), n1, n2). Sums and cross products
// give the sample covariance of the means.
struct MomentSums {
  std::uint64_t n = 0;
  std::array<double, 4> sum{};
  std::array<std::array<double, 4>, 4> cross{};

  void add(std::uint64_t n1, std::uint64_t n2) {
    const std::array<double, 4> v{static_cast<double>(n1) * (static_cast<double>(n1) - 1.0),
                                  static_cast<double>(n2) * (static_cast<double>(n2) - 1.0),
                                  static_cast<double>(n1), static_cast<double>(n2)};
    ++n;
    for (std::size_t i = 0; i < 4; ++i) {
      sum[i] += v[i];
      for (std::size_t j = 0; j < 4; ++j) cross[i][j] += v[i] * v[j];
    }
  }

  MomentSums& operator+=(const MomentSums& o) {
    n += o.n;
    for (std::size_t i = 0; i < 4; ++i) {
      sum[i] += o.sum[i];
      for (std::size_t j = 0; j < 4; ++j) cross[i][j] += o.cross[i][j];
    }
    return *this;
  }
};

double quad_form(const std::array<double, 4>& g, const std::array<std::array<double, 4>, 4>& cov) {
  double v = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) v += g[i] * cov[i][j] * g[j];
  }
  return std::sqrt(std::max(v, 0.0));
}

}  // namespace

double visibility_from_g2(double g2) {
  if (!(g2 >= 0.0)) throw std::invalid_argument(fmt::format("g2 must be >= 0 (got {})", g2));
  return 1.0 / (1.0 + g2);
}

PhotonSampler fock_sampler(std::uint64_t n) {
  return [n](Rng&) { return n; };
}

PhotonSampler thermal_sampler(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("thermal mean must be >= 0");
  const double ratio = mean / (1.0 + mean);
  return [ratio](Rng& rng) { return sample_geometric(ratio, rng); };
}

PhotonSampler poisson_sampler(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("Poisson mean must be >= 0");
  return [mean](Rng& rng) { return sample_poisson(mean, rng); };
}

PhotonSampler heralded_sampler(const mc::SourceParams& p) {
  p.validate();
  return [p](Rng& rng) { return mc::sample_heralded_photons(p, rng); };
}

HomResult visibility_from_moments(const PhotonSampler& sampler, std::uint64_t n_trials,
                                  const mc::RngPlan& plan, unsigned threads) {
  if (n_trials < 2) throw std::invalid_argument("need at least two trials");
  const std::uint64_t n_batches = mc::batch_count(n_trials, plan);
  std::vector<MomentSums> parts(n_batches);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t b = next++; b < n_batches; b = next++) {
      Rng rng = make_stream(plan.master_seed, b, 0x686f6d);
      const std::uint64_t begin = b * plan.batch_size;
      const std::uint64_t end = std::min(begin + plan.batch_size, n_trials);
      for (std::uint64_t t = begin; t < end; ++t) {
        const std::uint64_t n1 = sampler(rng);
        const std::uint64_t n2 = sampler(rng);
        parts[b].add(n1, n2);
      }
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(mc::worker_threads(threads), n_batches));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  MomentSums s;
  for (const auto& part : parts) s += part;

  const double n = static_cast<double>(s.n);
  std::array<double, 4> mean{};
  for (std::size_t i = 0; i < 4; ++i) mean[i] = s.sum[i] / n;
  // Covariance of the sample means.
  std::array<std::array<double, 4>, 4> cov{};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      cov[i][j] = (s.cross[i][j] - n * mean[i] * mean[j]) / (n - 1.0) / n;
    }
  }
  const double a1 = mean[0], a2 = mean[1], m1 = mean[2], m2 = mean[3];
  if (m1 == 0.0 || m2 == 0.0) throw DegenerateSource("source emitted no photons");

  HomResult r;
  r.trials = s.n;
  r.p0 = (a1 + a2) / 4.0;
  r.p_inf = (a1 + a2 + 2.0 * m1 * m2) / 4.0;
  r.visibility = 1.0 - r.p0 / r.p_inf;
  r.p0_err = quad_form({0.25, 0.25, 0.0, 0.0}, cov);
  r.p_inf_err = quad_form({0.25, 0.25, m2 / 2.0, m1 / 2.0}, cov);
  const double d = a1 + a2 + 2.0 * m1 * m2;
  const double d2 = d * d;
  r.visibility_err = quad_form({-2.0 * m1 * m2 / d2, -2.0 * m1 * m2 / d2,
                                2.0 * m2 * (a1 + a2) / d2, 2.0 * m1 * (a1 + a2) / d2},
                               cov);
  return r;
}

}  // namespace phlab::hom
