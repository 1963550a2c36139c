#pragma once

// Second-order correlation estimators over detection/coincidence counts.
//
// All estimators work on per-slot probabilities p = N / trials. With
// threshold detectors each slot contributes at most one count per event,
// so e.g. the cross correlation
//
//   g2 = p_ab / (p_a p_b) = N_ab * N_trials / (N_a * N_b)
//
// and the heralded autocorrelation of arms 1,2 conditioned on herald h
//
//   g2 = p_12h p_h / (p_1h p_2h) = N_12h * N_h / (N_1h * N_2h).

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "phlab/channels.hpp"
#include "phlab/counts.hpp"

namespace phlab {

class DegenerateCounts : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class G2Kind { cross, auto_unheralded, auto_heralded };

std::string_view to_string(G2Kind kind);

struct G2Estimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t numerator_counts = 0;
  G2Kind kind = G2Kind::cross;
  // Set when the numerator is zero: value is 0 and std_err is the value one
  // would obtain at the one-sided Poisson upper bound for zero counts.
  bool degenerate = false;
};

/// 1-sigma one-sided Poisson upper limit for an observation of zero events.
inline constexpr double kZeroCountUpperLimit = 1.841;

/// sqrt(sum 1/N_k); infinite when any count is zero.
double poisson_relative_error(std::initializer_list<std::uint64_t> counts);

/// Absolute standard error of a ratio estimator built from independent
/// Poisson counts.
double g2_std_err(double value, std::initializer_list<std::uint64_t> counts);

// Count-level estimators. Zero denominators throw DegenerateCounts.
G2Estimate cross_g2(std::uint64_t trials, std::uint64_t n_a, std::uint64_t n_b,
                    std::uint64_t n_ab);
G2Estimate auto_g2_unheralded(std::uint64_t trials, std::uint64_t n_1, std::uint64_t n_2,
                              std::uint64_t n_12);
G2Estimate auto_g2_heralded(std::uint64_t n_h, std::uint64_t n_1h, std::uint64_t n_2h,
                            std::uint64_t n_12h);

// Aggregate-level estimators.
G2Estimate cross_g2(const CountAggregate& agg, ChannelSet mode_a, ChannelSet mode_b);
G2Estimate auto_g2_unheralded(const CountAggregate& agg, Channel arm1, Channel arm2);
G2Estimate auto_g2_heralded(const CountAggregate& agg, Channel arm1, Channel arm2,
                            ChannelSet herald);

/// Standard error of an estimator by resampling whole units (MOT cycles or
/// batches of cycles) with replacement.
double bootstrap_std_err(std::span<const CountAggregate> units,
                         const std::function<G2Estimate(const CountAggregate&)>& estimator,
                         std::size_t resamples, std::uint64_t seed);

enum class Statistic : std::size_t {
  s_asv = 0,
  s_ast,
  s_s,
  asv_asv,
  ast_ast,
  s_s_given_asv,
  s_s_given_ast,
  asv_asv_given_s,
  ast_ast_given_s,
};

inline constexpr std::size_t kStatisticCount = 9;

inline constexpr std::array<Statistic, kStatisticCount> kAllStatistics{
    Statistic::s_asv,           Statistic::s_ast,           Statistic::s_s,
    Statistic::asv_asv,         Statistic::ast_ast,         Statistic::s_s_given_asv,
    Statistic::s_s_given_ast,   Statistic::asv_asv_given_s, Statistic::ast_ast_given_s};

std::string_view statistic_name(Statistic s);
std::optional<Statistic> parse_statistic(std::string_view name);

/// The correlation functions of one experiment. Entries whose channels were
/// not present (or never clicked) are left empty.
class CorrelationSet {
 public:
  const std::optional<G2Estimate>& operator[](Statistic s) const {
    return entries_[static_cast<std::size_t>(s)];
  }
  std::optional<G2Estimate>& operator[](Statistic s) {
    return entries_[static_cast<std::size_t>(s)];
  }

  bool has(Statistic s) const { return (*this)[s].has_value(); }

  /// Value of a statistic; throws std::out_of_range if absent.
  double value(Statistic s) const;

  /// Fills entries that are absent here from another set.
  void fill_missing_from(const CorrelationSet& other);

  std::size_t size() const;

 private:
  std::array<std::optional<G2Estimate>, kStatisticCount> entries_{};
};

/// Evaluates every statistic the aggregate supports.
CorrelationSet compute_correlations(const CountAggregate& agg);

// CSV: header "name,value,std_err,numerator_counts", one row per present
// statistic in the fixed order of kAllStatistics.
void write_correlations_csv(std::ostream& out, const CorrelationSet& set,
                            std::string_view config_hash = {});
CorrelationSet read_correlations_csv(std::istream& in);

/// Single-line JSON object keyed by statistic name.
std::string correlations_json_line(const CorrelationSet& set, std::string_view config_hash = {});

}  // namespace phlab
