#include "phlab/correlation.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "phlab/random.hpp"

namespace phlab {

namespace {

double as_double(std::uint64_t n) { return static_cast<double>(n); }

// value = numerator * scale; counts feed the Poisson error.
G2Estimate make_estimate(G2Kind kind, std::uint64_t numerator, double scale,
                         std::initializer_list<std::uint64_t> denominator_counts) {
  G2Estimate est;
  est.kind = kind;
  est.numerator_counts = numerator;
  if (numerator == 0) {
    est.value = 0.0;
    est.std_err = kZeroCountUpperLimit * scale;
    est.degenerate = true;
    return est;
  }
  est.value = as_double(numerator) * scale;
  double rel2 = 1.0 / as_double(numerator);
  for (std::uint64_t n : denominator_counts) rel2 += 1.0 / as_double(n);
  est.std_err = est.value * std::sqrt(rel2);
  return est;
}

constexpr std::array<std::string_view, kStatisticCount> kStatisticNames{
    "s_asv",         "s_ast",         "s_s",
    "asv_asv",       "ast_ast",       "s_s_given_asv",
    "s_s_given_ast", "asv_asv_given_s", "ast_ast_given_s"};

}  // namespace

std::string_view to_string(G2Kind kind) {
  switch (kind) {
    case G2Kind::cross: return "cross";
    case G2Kind::auto_unheralded: return "auto_unheralded";
    case G2Kind::auto_heralded: return "auto_heralded";
  }
  return "unknown";
}

double poisson_relative_error(std::initializer_list<std::uint64_t> counts) {
  double rel2 = 0.0;
  for (std::uint64_t n : counts) {
    if (n == 0) return std::numeric_limits<double>::infinity();
    rel2 += 1.0 / as_double(n);
  }
  return std::sqrt(rel2);
}

double g2_std_err(double value, std::initializer_list<std::uint64_t> counts) {
  const double rel = poisson_relative_error(counts);
  if (std::isinf(rel)) return rel;
  return std::abs(value) * rel;
}

G2Estimate cross_g2(std::uint64_t trials, std::uint64_t n_a, std::uint64_t n_b,
                    std::uint64_t n_ab) {
  if (trials == 0) throw DegenerateCounts("cross_g2: no trials");
  if (n_a == 0 || n_b == 0) throw DegenerateCounts("cross_g2: a singles count is zero");
  const double scale = as_double(trials) / (as_double(n_a) * as_double(n_b));
  return make_estimate(G2Kind::cross, n_ab, scale, {n_a, n_b});
}

G2Estimate auto_g2_unheralded(std::uint64_t trials, std::uint64_t n_1, std::uint64_t n_2,
                              std::uint64_t n_12) {
  if (trials == 0) throw DegenerateCounts("auto_g2_unheralded: no trials");
  if (n_1 == 0 || n_2 == 0) {
    throw DegenerateCounts("auto_g2_unheralded: an arm singles count is zero");
  }
  const double scale = as_double(trials) / (as_double(n_1) * as_double(n_2));
  return make_estimate(G2Kind::auto_unheralded, n_12, scale, {n_1, n_2});
}

G2Estimate auto_g2_heralded(std::uint64_t n_h, std::uint64_t n_1h, std::uint64_t n_2h,
                            std::uint64_t n_12h) {
  if (n_1h == 0 || n_2h == 0) {
    throw DegenerateCounts("auto_g2_heralded: a heralded singles count is zero");
  }
  const double scale = as_double(n_h) / (as_double(n_1h) * as_double(n_2h));
  return make_estimate(G2Kind::auto_heralded, n_12h, scale, {n_h, n_1h, n_2h});
}

G2Estimate cross_g2(const CountAggregate& agg, ChannelSet mode_a, ChannelSet mode_b) {
  return cross_g2(agg.trials(), agg.singles(mode_a), agg.singles(mode_b),
                  agg.coincidences({mode_a, mode_b}));
}

G2Estimate auto_g2_unheralded(const CountAggregate& agg, Channel arm1, Channel arm2) {
  const ChannelSet a{arm1};
  const ChannelSet b{arm2};
  return auto_g2_unheralded(agg.trials(), agg.singles(a), agg.singles(b),
                            agg.coincidences({a, b}));
}

G2Estimate auto_g2_heralded(const CountAggregate& agg, Channel arm1, Channel arm2,
                            ChannelSet herald) {
  const ChannelSet a{arm1};
  const ChannelSet b{arm2};
  return auto_g2_heralded(agg.singles(herald), agg.coincidences({a, herald}),
                          agg.coincidences({b, herald}), agg.coincidences({a, b, herald}));
}

double bootstrap_std_err(std::span<const CountAggregate> units,
                         const std::function<G2Estimate(const CountAggregate&)>& estimator,
                         std::size_t resamples, std::uint64_t seed) {
  if (units.size() < 2) throw std::invalid_argument("bootstrap needs at least two units");
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  Rng rng = make_stream(seed, 0, 0x626f6f74);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    CountAggregate pooled;
    for (std::size_t i = 0; i < units.size(); ++i) {
      pooled += units[uniform_below(units.size(), rng)];
    }
    double v;
    try {
      v = estimator(pooled).value;
    } catch (const DegenerateCounts&) {
      continue;
    }
    sum += v;
    sum_sq += v * v;
    ++used;
  }
  if (used < 2) throw DegenerateCounts("bootstrap: estimator degenerate on every resample");
  const double mean = sum / static_cast<double>(used);
  const double var = (sum_sq - static_cast<double>(used) * mean * mean) /
                     static_cast<double>(used - 1);
  return std::sqrt(std::max(var, 0.0));
}

std::string_view statistic_name(Statistic s) {
  return kStatisticNames.at(static_cast<std::size_t>(s));
}

std::optional<Statistic> parse_statistic(std::string_view name) {
  for (Statistic s : kAllStatistics) {
    if (statistic_name(s) == name) return s;
  }
  return std::nullopt;
}

double CorrelationSet::value(Statistic s) const {
  const auto& e = (*this)[s];
  if (!e) throw std::out_of_range(fmt::format("statistic {} not present", statistic_name(s)));
  return e->value;
}

void CorrelationSet::fill_missing_from(const CorrelationSet& other) {
  for (Statistic s : kAllStatistics) {
    if (!has(s) && other.has(s)) (*this)[s] = other[s];
  }
}

std::size_t CorrelationSet::size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.has_value() ? 1 : 0;
  return n;
}

CorrelationSet compute_correlations(const CountAggregate& agg) {
  CorrelationSet set;
  if (agg.trials() == 0) return set;
  auto attempt = [&](Statistic s, auto&& fn) {
    try {
      set[s] = fn();
    } catch (const DegenerateCounts&) {
      set[s].reset();
    }
  };
  using C = Channel;
  attempt(Statistic::s_asv, [&] { return cross_g2(agg, kModeS, kModeAsv); });
  attempt(Statistic::s_ast, [&] { return cross_g2(agg, kModeS, kModeAst); });
  attempt(Statistic::s_s, [&] { return auto_g2_unheralded(agg, C::Ds1, C::Ds2); });
  attempt(Statistic::asv_asv, [&] { return auto_g2_unheralded(agg, C::Dv1, C::Dv2); });
  attempt(Statistic::ast_ast, [&] { return auto_g2_unheralded(agg, C::Dt1, C::Dt2); });
  attempt(Statistic::s_s_given_asv,
          [&] { return auto_g2_heralded(agg, C::Ds1, C::Ds2, kModeAsv); });
  attempt(Statistic::s_s_given_ast,
          [&] { return auto_g2_heralded(agg, C::Ds1, C::Ds2, kModeAst); });
  attempt(Statistic::asv_asv_given_s,
          [&] { return auto_g2_heralded(agg, C::Dv1, C::Dv2, kModeS); });
  attempt(Statistic::ast_ast_given_s,
          [&] { return auto_g2_heralded(agg, C::Dt1, C::Dt2, kModeS); });
  return set;
}

void write_correlations_csv(std::ostream& out, const CorrelationSet& set,
                            std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "name,value,std_err,numerator_counts\n";
  for (Statistic s : kAllStatistics) {
    const auto& e = set[s];
    if (!e) continue;
    out << fmt::format("{},{:.12g},{:.12g},{}\n", statistic_name(s), e->value, e->std_err,
                       e->numerator_counts);
  }
}

CorrelationSet read_correlations_csv(std::istream& in) {
  CorrelationSet set;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.rfind("name,value", 0) != 0) {
        throw std::runtime_error(fmt::format("correlation CSV line {}: missing header", line_no));
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();  // counts may be left blank
    if (fields.size() != 4) {
      throw std::runtime_error(fmt::format("correlation CSV line {}: expected 4 fields", line_no));
    }
    const auto stat = parse_statistic(fields[0]);
    if (!stat) {
      throw std::runtime_error(
          fmt::format("correlation CSV line {}: unknown statistic '{}'", line_no, fields[0]));
    }
    G2Estimate e;
    try {
      e.value = std::stod(fields[1]);
      e.std_err = std::stod(fields[2]);
      e.numerator_counts = fields[3].empty() ? 0 : std::stoull(fields[3]);
    } catch (const std::logic_error&) {
      throw std::runtime_error(fmt::format("correlation CSV line {}: bad number", line_no));
    }
    if (!std::isfinite(e.value) || e.value < 0.0 || e.std_err < 0.0) {
      throw std::runtime_error(
          fmt::format("correlation CSV line {}: values must be finite and non-negative", line_no));
    }
    switch (*stat) {
      case Statistic::s_asv:
      case Statistic::s_ast: e.kind = G2Kind::cross; break;
      case Statistic::s_s:
      case Statistic::asv_asv:
      case Statistic::ast_ast: e.kind = G2Kind::auto_unheralded; break;
      default: e.kind = G2Kind::auto_heralded; break;
    }
    set[*stat] = e;
  }
  if (!header_seen) throw std::runtime_error("correlation CSV: empty input");
  return set;
}

std::string correlations_json_line(const CorrelationSet& set, std::string_view config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = std::string(config_hash);
  for (Statistic s : kAllStatistics) {
    const auto& e = set[s];
    if (!e) continue;
    j[std::string(statistic_name(s))] = {{"value", e->value},
                                         {"std_err", e->std_err},
                                         {"numerator_counts", e->numerator_counts},
                                         {"kind", std::string(to_string(e->kind))},
                                         {"degenerate", e->degenerate}};
  }
  return j.dump();
}

}  // namespace phlab
