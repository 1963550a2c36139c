#include "phlab/counts.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace phlab {

std::uint64_t CountAggregate::trials() const {
  std::uint64_t total = 0;
  for (std::uint64_t n : patterns_) total += n;
  return total;
}

std::uint64_t CountAggregate::coincidences(std::span<const ChannelSet> groups) const {
  std::uint64_t total = 0;
  for (std::size_t p = 1; p < kPatterns; ++p) {
    if (patterns_[p] == 0) continue;
    const auto clicks = ChannelSet::from_bits(static_cast<std::uint8_t>(p));
    bool all = true;
    for (ChannelSet g : groups) {
      if (!clicks.intersects(g)) {
        all = false;
        break;
      }
    }
    if (all) total += patterns_[p];
  }
  return total;
}

ChannelSet CountAggregate::active_channels() const {
  ChannelSet out;
  for (std::size_t p = 1; p < kPatterns; ++p) {
    if (patterns_[p] != 0) out |= ChannelSet::from_bits(static_cast<std::uint8_t>(p));
  }
  return out;
}

CountAggregate& CountAggregate::operator+=(const CountAggregate& other) {
  for (std::size_t p = 0; p < kPatterns; ++p) patterns_[p] += other.patterns_[p];
  return *this;
}

void write_aggregate_csv(std::ostream& out, const CountAggregate& agg,
                         std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "pattern,Ds1,Ds2,Dv1,Dv2,Dt1,Dt2,count\n";
  for (std::size_t p = 0; p < CountAggregate::kPatterns; ++p) {
    const auto clicks = ChannelSet::from_bits(static_cast<std::uint8_t>(p));
    const std::uint64_t n = agg.pattern_count(clicks);
    if (n == 0) continue;
    out << p;
    for (Channel ch : kAllChannels) out << ',' << (clicks.contains(ch) ? 1 : 0);
    out << ',' << n << '\n';
  }
}

CountAggregate read_aggregate_csv(std::istream& in) {
  CountAggregate agg;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.rfind("pattern,", 0) != 0) {
        throw std::runtime_error(fmt::format("aggregate CSV line {}: missing header", line_no));
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 2 + kChannelCount) {
      throw std::runtime_error(fmt::format("aggregate CSV line {}: expected {} fields, got {}",
                                           line_no, 2 + kChannelCount, fields.size()));
    }
    try {
      const unsigned long pattern = std::stoul(fields[0]);
      if (pattern >= CountAggregate::kPatterns) throw std::out_of_range("pattern");
      ChannelSet clicks;
      for (std::size_t c = 0; c < kChannelCount; ++c) {
        if (fields[1 + c] == "1") clicks.insert(kAllChannels[c]);
        else if (fields[1 + c] != "0") throw std::invalid_argument("flag");
      }
      if (clicks.bits() != pattern) throw std::invalid_argument("pattern/flags mismatch");
      agg.record(clicks, std::stoull(fields.back()));
    } catch (const std::logic_error& e) {
      throw std::runtime_error(fmt::format("aggregate CSV line {}: {}", line_no, e.what()));
    }
  }
  if (!header_seen) throw std::runtime_error("aggregate CSV: empty input");
  return agg;
}

}  // namespace phlab
