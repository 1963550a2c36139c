#include "phlab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "phlab/atomic.hpp"

namespace phlab::mc {

namespace {

constexpr std::uint64_t kPhysicsStream = 0;
constexpr std::uint64_t kTimestampStream = 1;
constexpr std::uint64_t kNuisanceStream = 2;
constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

void require_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(fmt::format("{} must lie in [0, 1] (got {})", name, v));
  }
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("{} must be finite and >= 0 (got {})", name, v));
  }
}

double polarization_factor() {
  static const double factor = 1.0 - atomic::polarization_ratio_and_loss().loss;
  return factor;
}

std::uint64_t saturating_next(std::uint64_t t, std::uint64_t skip) {
  if (skip >= kNever - t - 1) return kNever;
  return t + 1 + skip;
}

Channel as_arm(const SourceParams& p, int arm) {
  if (p.qfc) return arm == 0 ? Channel::Dt1 : Channel::Dt2;
  return arm == 0 ? Channel::Dv1 : Channel::Dv2;
}

void emit_clicks(std::vector<TimeTagRecord>& out, std::uint64_t slot, ChannelSet clicks,
                 const WindowConfig& w, Rng& ts_rng) {
  for (Channel ch : kAllChannels) {
    if (!clicks.contains(ch)) continue;
    const Window& win = w.window_for(ch);
    out.push_back(make_record(slot, ch, win.offset_ns + uniform_below(win.width_ns, ts_rng)));
  }
}

void emit_nuisance(std::vector<TimeTagRecord>& out, const SourceParams& p, std::uint64_t begin,
                   std::uint64_t end, const EmissionConfig& e, Rng& rng) {
  if (e.nuisance_rate <= 0.0 || e.nuisance_times_ns.empty()) return;
  const ChannelSet present = p.present_channels();
  for (Channel ch : kAllChannels) {
    if (!present.contains(ch)) continue;
    std::uint64_t t = begin;
    const std::uint64_t first = sample_failures_before_success(e.nuisance_rate, rng);
    t = first >= end - begin ? end : begin + first;
    while (t < end) {
      const auto& times = e.nuisance_times_ns;
      out.push_back(make_record(t, ch, times[uniform_below(times.size(), rng)]));
      t = saturating_next(t, sample_failures_before_success(e.nuisance_rate, rng));
    }
  }
}

void direct_batch(const SourceParams& p, std::uint64_t begin, std::uint64_t end, Rng& rng,
                  BatchResult& out, const EmissionConfig* emit, Rng& ts_rng) {
  std::uint64_t quiet = 0;
  for (std::uint64_t t = begin; t < end; ++t) {
    const TrialOutcome o = simulate_trial(p, rng);
    if (o.clicks.empty()) {
      ++quiet;
      continue;
    }
    out.aggregate.record(o.clicks);
    if (emit) emit_clicks(out.records, t, o.clicks, emit->windows, ts_rng);
  }
  out.aggregate.record(ChannelSet{}, quiet);
}

// Independent sources of clicks within one slot. Each is active in a slot
// with a fixed probability, so the next active slot is a geometric skip.
struct Component {
  enum class Kind { pairs, noise, dark } kind;
  double activation = 0.0;
  Channel channel = Channel::Ds1;  // dark counts only
  std::uint64_t next = kNever;
};

// Exact in distribution to direct_batch:
//  - thinning a geometric pair number with "any photon of the pair is
//    detected" probability 1 - r gives again a geometric law with ratio
//    x (1 - r) / (1 - x r); its non-zero outcomes are the only pair events
//    that can click,
//  - Bin(Bin(n, a) + Poisson(mu), c) = Bin(n, a c) + Poisson(mu c),
//  - Poissonian dark counts click with probability 1 - exp(-rate).
void sparse_batch(const SourceParams& p, std::uint64_t begin, std::uint64_t end, Rng& rng,
                  BatchResult& out, const EmissionConfig* emit, Rng& ts_rng) {
  const double x = p.pair_ratio();
  const double eta_s = p.eta_s;
  const double eta_a = p.anti_stokes_detection_efficiency();
  const double hit = eta_s + eta_a - eta_s * eta_a;  // 1 - r
  const double marked_ratio = x * hit / (1.0 - x * (1.0 - hit));
  const double w_s_only = eta_s * (1.0 - eta_a);
  const double w_a_only = (1.0 - eta_s) * eta_a;
  const double noise = p.qfc ? p.noise_mean * p.eta_conv : 0.0;

  std::vector<Component> comps;
  comps.push_back({Component::Kind::pairs, marked_ratio});
  comps.push_back({Component::Kind::noise, -std::expm1(-noise)});
  const ChannelSet present = p.present_channels();
  for (Channel ch : kAllChannels) {
    const double d = p.dark_rate[index_of(ch)];
    if (present.contains(ch) && d > 0.0) {
      comps.push_back({Component::Kind::dark, -std::expm1(-d), ch});
    }
  }
  const std::uint64_t span = end - begin;
  for (auto& c : comps) {
    const std::uint64_t skip = sample_failures_before_success(c.activation, rng);
    c.next = skip >= span ? kNever : begin + skip;
  }

  std::uint64_t active = 0;
  while (true) {
    std::uint64_t t = kNever;
    for (const auto& c : comps) t = std::min(t, c.next);
    if (t >= end) break;

    ChannelSet clicks;
    for (auto& c : comps) {
      if (c.next != t) continue;
      switch (c.kind) {
        case Component::Kind::pairs: {
          const std::uint64_t marked = 1 + sample_geometric(marked_ratio, rng);
          for (std::uint64_t i = 0; i < marked; ++i) {
            const double u = uniform01(rng) * hit;
            const bool s = u >= w_a_only;
            const bool a = u < w_a_only || u >= w_a_only + w_s_only;
            if (s) clicks.insert((rng() & 1u) ? Channel::Ds2 : Channel::Ds1);
            if (a) clicks.insert(as_arm(p, static_cast<int>(rng() & 1u)));
          }
          break;
        }
        case Component::Kind::noise: {
          const std::uint64_t m = sample_zero_truncated_poisson(noise, rng);
          for (std::uint64_t i = 0; i < m; ++i) clicks.insert(as_arm(p, static_cast<int>(rng() & 1u)));
          break;
        }
        case Component::Kind::dark:
          clicks.insert(c.channel);
          break;
      }
      c.next = saturating_next(t, sample_failures_before_success(c.activation, rng));
    }
    out.aggregate.record(clicks);
    ++active;
    if (emit) emit_clicks(out.records, t, clicks, emit->windows, ts_rng);
  }
  out.aggregate.record(ChannelSet{}, span - active);
}

}  // namespace

double SourceParams::effective_eta_asv() const {
  return polarization_loss ? eta_asv * polarization_factor() : eta_asv;
}

double SourceParams::anti_stokes_detection_efficiency() const {
  return qfc ? effective_eta_asv() * eta_conv : effective_eta_asv();
}

double SourceParams::zeta() const {
  if (noise_mean <= 0.0) return std::numeric_limits<double>::infinity();
  return mean_pairs * effective_eta_asv() / noise_mean;
}

ChannelSet SourceParams::present_channels() const {
  return qfc ? (kModeS | kModeAst) : (kModeS | kModeAsv);
}

void SourceParams::validate() const {
  require_non_negative(mean_pairs, "mean_pairs");
  require_probability(eta_s, "eta_s");
  require_probability(eta_asv, "eta_asv");
  require_probability(eta_conv, "eta_conv");
  require_non_negative(noise_mean, "noise_mean");
  for (Channel ch : kAllChannels) {
    require_non_negative(dark_rate[index_of(ch)], "dark_rate");
  }
}

double mean_pairs_for_excitation(double p_ex) {
  if (!(p_ex >= 0.0 && p_ex < 1.0)) {
    throw std::invalid_argument(fmt::format("p_ex must lie in [0, 1) (got {})", p_ex));
  }
  return p_ex / (1.0 - p_ex);
}

double noise_mean_for_zeta(const SourceParams& p, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be > 0");
  return p.mean_pairs * p.effective_eta_asv() / zeta;
}

PairNumbers sample_pair_numbers(const SourceParams& p, Rng& rng) {
  const std::uint64_t n = sample_geometric(p.pair_ratio(), rng);
  return {n, n};
}

std::uint64_t apply_loss(std::uint64_t n, double eta, Rng& rng) {
  require_probability(eta, "eta");
  return sample_binomial(n, eta, rng);
}

std::uint64_t add_conversion_noise(std::uint64_t n_as, const SourceParams& p, Rng& rng) {
  const std::uint64_t total = n_as + sample_poisson(p.noise_mean, rng);
  return sample_binomial(total, p.eta_conv, rng);
}

ArmClicks split_and_detect(std::uint64_t n, double dark_a, double dark_b, Rng& rng) {
  const std::uint64_t in_a = sample_binomial(n, 0.5, rng);
  ArmClicks c;
  c.a = in_a > 0 || sample_poisson(dark_a, rng) > 0;
  c.b = (n - in_a) > 0 || sample_poisson(dark_b, rng) > 0;
  return c;
}

TrialOutcome simulate_trial(const SourceParams& p, Rng& rng) {
  TrialOutcome o;
  const PairNumbers pairs = sample_pair_numbers(p, rng);
  o.n_pairs = pairs.n_s;
  o.n_s_at_splitter = apply_loss(pairs.n_s, p.eta_s, rng);
  std::uint64_t n_as = apply_loss(pairs.n_as, p.effective_eta_asv(), rng);
  if (p.qfc) n_as = add_conversion_noise(n_as, p, rng);
  o.n_as_at_splitter = n_as;

  const auto& d = p.dark_rate;
  const ArmClicks s =
      split_and_detect(o.n_s_at_splitter, d[index_of(Channel::Ds1)], d[index_of(Channel::Ds2)], rng);
  const Channel a1 = as_arm(p, 0);
  const Channel a2 = as_arm(p, 1);
  const ArmClicks a = split_and_detect(n_as, d[index_of(a1)], d[index_of(a2)], rng);
  if (s.a) o.clicks.insert(Channel::Ds1);
  if (s.b) o.clicks.insert(Channel::Ds2);
  if (a.a) o.clicks.insert(a1);
  if (a.b) o.clicks.insert(a2);
  return o;
}

std::uint64_t sample_heralded_photons(const SourceParams& p, Rng& rng) {
  const bool can_herald =
      (p.mean_pairs > 0.0 && p.eta_s > 0.0) || p.dark_rate[index_of(Channel::Ds1)] > 0.0 ||
      p.dark_rate[index_of(Channel::Ds2)] > 0.0;
  if (!can_herald) throw std::invalid_argument("source parameters never produce a Stokes herald");
  while (true) {
    const TrialOutcome o = simulate_trial(p, rng);
    if (o.clicks.intersects(kModeS)) return o.n_as_at_splitter;
  }
}

void EmissionConfig::validate() const {
  windows.validate();
  require_probability(nuisance_rate, "nuisance_rate");
  for (std::uint32_t t : nuisance_times_ns) {
    if (t >= kSlotPeriodNs || windows.s_window.contains(t) || windows.as_window.contains(t)) {
      throw std::invalid_argument(
          fmt::format("nuisance time {} ns must lie inside the slot and outside both windows", t));
    }
  }
}

std::uint64_t batch_count(std::uint64_t n_trials, const RngPlan& plan) {
  if (plan.batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
  return (n_trials + plan.batch_size - 1) / plan.batch_size;
}

BatchResult run_batch(const SourceParams& p, std::uint64_t n_trials, const RngPlan& plan,
                      std::uint64_t batch, const ExperimentOptions& opts) {
  p.validate();
  if (batch >= batch_count(n_trials, plan)) throw std::out_of_range("batch index out of range");
  const std::uint64_t begin = batch * plan.batch_size;
  const std::uint64_t end = std::min(begin + plan.batch_size, n_trials);
  const EmissionConfig* emit = opts.emission ? &*opts.emission : nullptr;

  Rng rng = make_stream(plan.master_seed, batch, kPhysicsStream);
  Rng ts_rng = make_stream(plan.master_seed, batch, kTimestampStream);
  BatchResult out;
  if (opts.engine == Engine::direct) {
    direct_batch(p, begin, end, rng, out, emit, ts_rng);
  } else {
    sparse_batch(p, begin, end, rng, out, emit, ts_rng);
  }
  if (emit) {
    Rng nuisance_rng = make_stream(plan.master_seed, batch, kNuisanceStream);
    emit_nuisance(out.records, p, begin, end, *emit, nuisance_rng);
    std::sort(out.records.begin(), out.records.end(),
              [](const TimeTagRecord& a, const TimeTagRecord& b) {
                if (a.slot() != b.slot()) return a.slot() < b.slot();
                if (a.timestamp_ns != b.timestamp_ns) return a.timestamp_ns < b.timestamp_ns;
                return a.channel < b.channel;
              });
  }
  return out;
}

ExperimentResult run_experiment(const SourceParams& p, std::uint64_t n_trials,
                                const RngPlan& plan, const ExperimentOptions& opts) {
  if (n_trials == 0) throw std::invalid_argument("n_trials must be > 0");
  p.validate();
  if (opts.emission) opts.emission->validate();
  if (n_trials > std::uint64_t{UINT32_MAX} * kSequencesPerCycle && opts.emission) {
    throw std::invalid_argument("too many trials for 32-bit cycle indices in time tags");
  }
  const std::uint64_t n_batches = batch_count(n_trials, plan);
  std::vector<BatchResult> results(n_batches);

  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(worker_threads(opts.threads), n_batches));
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t b = next++; b < n_batches; b = next++) {
      results[b] = run_batch(p, n_trials, plan, b, opts);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }

  ExperimentResult out;
  out.batch_aggregates.reserve(n_batches);
  for (auto& r : results) {
    out.aggregate += r.aggregate;
    out.batch_aggregates.push_back(r.aggregate);
    out.records.insert(out.records.end(), r.records.begin(), r.records.end());
  }
  return out;
}

unsigned worker_threads(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PHLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

}  // namespace phlab::mc
