#pragma once

// Time-tag event files and the window-based coincidence analysis.
//
// Binary layout (little-endian):
//   header  8 bytes  "PHTT0001"
//   record 16 bytes  cycle u32 | sequence u16 | channel u8 | reserved u8 (0) |
//                    timestamp_ns u64
// Files ending in ".csv" hold the same fields as text with the header
// "cycle,sequence,channel,timestamp_ns" (channel as its integer code).

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "phlab/channels.hpp"
#include "phlab/counts.hpp"

namespace phlab {

inline constexpr std::uint32_t kSequencesPerCycle = 990;
inline constexpr std::uint32_t kSlotPeriodNs = 1000;

struct TimeTagRecord {
  std::uint32_t cycle = 0;
  std::uint16_t sequence = 0;
  Channel channel = Channel::Ds1;
  std::uint64_t timestamp_ns = 0;  // since the TDC start of the slot

  std::uint64_t slot() const {
    return static_cast<std::uint64_t>(cycle) * kSequencesPerCycle + sequence;
  }

  friend bool operator==(const TimeTagRecord&, const TimeTagRecord&) = default;
};

TimeTagRecord make_record(std::uint64_t slot, Channel channel, std::uint64_t timestamp_ns);

bool is_valid(const TimeTagRecord& r);

inline constexpr std::array<char, 8> kTimeTagMagic{'P', 'H', 'T', 'T', '0', '0', '0', '1'};
inline constexpr std::size_t kHeaderBytes = 8;
inline constexpr std::size_t kRecordBytes = 16;

class TimeTagError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadMagic : public TimeTagError {
 public:
  BadMagic();
};

class TruncatedRecord : public TimeTagError {
 public:
  explicit TruncatedRecord(std::uint64_t byte_offset);
  std::uint64_t byte_offset() const { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

class InvariantViolation : public TimeTagError {
 public:
  InvariantViolation(std::uint64_t record_index, const std::string& what);
  std::uint64_t record_index() const { return record_index_; }

 private:
  std::uint64_t record_index_;
};

void encode_record(const TimeTagRecord& r, std::span<std::byte, kRecordBytes> out);
TimeTagRecord decode_record(std::span<const std::byte, kRecordBytes> in);

std::vector<std::byte> encode_stream(std::span<const TimeTagRecord> records);
std::vector<TimeTagRecord> parse_stream(std::span<const std::byte> bytes);

/// Writes the header on construction and one record per call.
class TimeTagWriter {
 public:
  explicit TimeTagWriter(std::ostream& out);
  void write(const TimeTagRecord& r);
  std::uint64_t records_written() const { return count_; }

 private:
  std::ostream& out_;
  std::uint64_t count_ = 0;
};

/// Single-pass binary reader; holds one record buffer at a time.
class TimeTagReader {
 public:
  explicit TimeTagReader(std::istream& in);
  std::optional<TimeTagRecord> next();
  std::uint64_t records_read() const { return count_; }

 private:
  std::istream& in_;
  std::uint64_t count_ = 0;
};

void write_timetag_csv(std::ostream& out, std::span<const TimeTagRecord> records);
std::vector<TimeTagRecord> read_timetag_csv(std::istream& in);

/// Reads a file, choosing the CSV parser for a ".csv" extension.
std::vector<TimeTagRecord> read_timetag_file(const std::filesystem::path& path);
void write_timetag_file(const std::filesystem::path& path, std::span<const TimeTagRecord> records);

/// Half-open acceptance window [offset, offset + width) within a slot.
struct Window {
  std::uint32_t offset_ns = 0;
  std::uint32_t width_ns = 0;

  bool contains(std::uint64_t t) const { return t >= offset_ns && t < offset_ns + std::uint64_t{width_ns}; }
  friend bool operator==(const Window&, const Window&) = default;
};

struct WindowConfig {
  Window s_window{500, 250};   // Stokes detectors
  Window as_window{300, 100};  // anti-Stokes detectors, before or after conversion
  std::uint32_t histogram_bin_ns = 10;

  const Window& window_for(Channel ch) const;
  void validate() const;  // throws std::invalid_argument

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

struct SlotFlags {
  std::uint64_t slot = 0;
  ChannelSet detected;

  friend bool operator==(const SlotFlags&, const SlotFlags&) = default;
};

/// Per-slot detection flags, sorted by slot, for slots with at least one
/// in-window record. Several records of one channel in one slot count once.
std::vector<SlotFlags> window_select(std::span<const TimeTagRecord> records,
                                     const WindowConfig& cfg);

/// Aggregates flags over `trials` analysed slots; slots not listed had no
/// detection.
CountAggregate accumulate(std::span<const SlotFlags> flags, std::uint64_t trials);

/// Number of slots in the complete cycles spanned by the records.
std::uint64_t infer_trials(std::span<const TimeTagRecord> records);

class BadBinWidth : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-channel occupancy over the slot period.
class Histogram {
 public:
  explicit Histogram(std::uint32_t bin_ns);

  void add(const TimeTagRecord& r);
  Histogram& operator+=(const Histogram& other);

  std::uint32_t bin_ns() const { return bin_ns_; }
  std::size_t bins() const { return counts_[0].size(); }
  std::uint64_t count(Channel ch, std::size_t bin) const { return counts_[index_of(ch)].at(bin); }
  std::uint64_t total(Channel ch) const;

  void write_csv(std::ostream& out, std::string_view config_hash = {}) const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::uint32_t bin_ns_;
  std::array<std::vector<std::uint64_t>, kChannelCount> counts_;
};

Histogram histogram(std::span<const TimeTagRecord> records, const WindowConfig& cfg);

}  // namespace phlab
