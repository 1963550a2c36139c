#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string_view>

#include "phlab/channels.hpp"

namespace phlab {

/// Click statistics of a run, stored as a histogram over the 64 possible
/// per-slot click patterns. Every singles, pair and triple coincidence count
/// used by the correlation estimators is a sum over this histogram, so the
/// containment invariants (coincidences <= singles <= trials) hold by
/// construction and merging is plain addition.
class CountAggregate {
 public:
  static constexpr std::size_t kPatterns = std::size_t{1} << kChannelCount;

  void record(ChannelSet clicks, std::uint64_t n = 1) { patterns_[clicks.bits()] += n; }

  std::uint64_t trials() const;
  std::uint64_t pattern_count(ChannelSet clicks) const { return patterns_[clicks.bits()]; }

  /// Slots in which every group has at least one click. Each group is an
  /// "any of" union; a slot counts once no matter how many channels fired.
  std::uint64_t coincidences(std::span<const ChannelSet> groups) const;
  std::uint64_t coincidences(std::initializer_list<ChannelSet> groups) const {
    return coincidences(std::span<const ChannelSet>(groups.begin(), groups.size()));
  }
  std::uint64_t singles(ChannelSet group) const { return coincidences({group}); }
  std::uint64_t singles(Channel ch) const { return singles(ChannelSet{ch}); }

  /// Channels that clicked at least once.
  ChannelSet active_channels() const;

  CountAggregate& operator+=(const CountAggregate& other);
  friend CountAggregate operator+(CountAggregate a, const CountAggregate& b) { return a += b; }
  friend bool operator==(const CountAggregate&, const CountAggregate&) = default;

 private:
  std::array<std::uint64_t, kPatterns> patterns_{};
};

// CSV layout: optional "# config_hash=<hex>" comment, then the header
// "pattern,Ds1,Ds2,Dv1,Dv2,Dt1,Dt2,count" and one row per non-empty pattern.
void write_aggregate_csv(std::ostream& out, const CountAggregate& agg,
                         std::string_view config_hash = {});
CountAggregate read_aggregate_csv(std::istream& in);

}  // namespace phlab
