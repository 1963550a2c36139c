#include "phlab/timetag.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace phlab {

namespace {

template <typename T>
void put_le(std::byte* dst, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<std::byte>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xffu);
  }
}

template <typename T>
T get_le(const std::byte* src) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(src[i])) << (8 * i);
  }
  return static_cast<T>(v);
}

std::string violation(const TimeTagRecord& r) {
  if (r.sequence >= kSequencesPerCycle) return fmt::format("sequence {} >= 990", r.sequence);
  if (index_of(r.channel) >= kChannelCount) {
    return fmt::format("channel {} >= 6", static_cast<unsigned>(r.channel));
  }
  if (r.timestamp_ns >= kSlotPeriodNs) return fmt::format("timestamp {} ns >= 1000", r.timestamp_ns);
  return {};
}

void check(const TimeTagRecord& r, std::uint64_t index) {
  if (auto why = violation(r); !why.empty()) throw InvariantViolation(index, why);
}

TimeTagRecord decode_checked(const std::byte* p, std::uint64_t index) {
  if (std::to_integer<std::uint8_t>(p[7]) != 0) {
    throw InvariantViolation(index, "reserved byte is not zero");
  }
  if (std::to_integer<std::uint8_t>(p[6]) >= kChannelCount) {
    throw InvariantViolation(index, fmt::format("channel {} >= 6",
                                                std::to_integer<unsigned>(p[6])));
  }
  TimeTagRecord r = decode_record(std::span<const std::byte, kRecordBytes>(p, kRecordBytes));
  check(r, index);
  return r;
}

}  // namespace

BadMagic::BadMagic() : TimeTagError("time-tag stream: bad magic header (expected PHTT0001)") {}

TruncatedRecord::TruncatedRecord(std::uint64_t byte_offset)
    : TimeTagError(fmt::format("time-tag stream: truncated record at byte offset {}", byte_offset)),
      byte_offset_(byte_offset) {}

InvariantViolation::InvariantViolation(std::uint64_t record_index, const std::string& what)
    : TimeTagError(fmt::format("time-tag record {}: {}", record_index, what)),
      record_index_(record_index) {}

TimeTagRecord make_record(std::uint64_t slot, Channel channel, std::uint64_t timestamp_ns) {
  TimeTagRecord r;
  r.cycle = static_cast<std::uint32_t>(slot / kSequencesPerCycle);
  r.sequence = static_cast<std::uint16_t>(slot % kSequencesPerCycle);
  r.channel = channel;
  r.timestamp_ns = timestamp_ns;
  return r;
}

bool is_valid(const TimeTagRecord& r) { return violation(r).empty(); }

void encode_record(const TimeTagRecord& r, std::span<std::byte, kRecordBytes> out) {
  put_le<std::uint32_t>(out.data(), r.cycle);
  put_le<std::uint16_t>(out.data() + 4, r.sequence);
  out[6] = static_cast<std::byte>(index_of(r.channel));
  out[7] = std::byte{0};
  put_le<std::uint64_t>(out.data() + 8, r.timestamp_ns);
}

TimeTagRecord decode_record(std::span<const std::byte, kRecordBytes> in) {
  TimeTagRecord r;
  r.cycle = get_le<std::uint32_t>(in.data());
  r.sequence = get_le<std::uint16_t>(in.data() + 4);
  r.channel = static_cast<Channel>(std::to_integer<std::uint8_t>(in[6]));
  r.timestamp_ns = get_le<std::uint64_t>(in.data() + 8);
  return r;
}

std::vector<std::byte> encode_stream(std::span<const TimeTagRecord> records) {
  std::vector<std::byte> out(kHeaderBytes + kRecordBytes * records.size());
  std::transform(kTimeTagMagic.begin(), kTimeTagMagic.end(), out.begin(),
                 [](char c) { return static_cast<std::byte>(c); });
  for (std::size_t i = 0; i < records.size(); ++i) {
    check(records[i], i);
    encode_record(records[i], std::span<std::byte, kRecordBytes>(
                                  out.data() + kHeaderBytes + i * kRecordBytes, kRecordBytes));
  }
  return out;
}

std::vector<TimeTagRecord> parse_stream(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderBytes) throw BadMagic();
  for (std::size_t i = 0; i < kHeaderBytes; ++i) {
    if (std::to_integer<char>(bytes[i]) != kTimeTagMagic[i]) throw BadMagic();
  }
  const std::size_t body = bytes.size() - kHeaderBytes;
  const std::size_t n = body / kRecordBytes;
  std::vector<TimeTagRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back(decode_checked(bytes.data() + kHeaderBytes + i * kRecordBytes, i));
  }
  if (body % kRecordBytes != 0) throw TruncatedRecord(kHeaderBytes + n * kRecordBytes);
  return records;
}

TimeTagWriter::TimeTagWriter(std::ostream& out) : out_(out) {
  out_.write(kTimeTagMagic.data(), kTimeTagMagic.size());
}

void TimeTagWriter::write(const TimeTagRecord& r) {
  check(r, count_);
  std::array<std::byte, kRecordBytes> buf{};
  encode_record(r, buf);
  out_.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  ++count_;
}

TimeTagReader::TimeTagReader(std::istream& in) : in_(in) {
  std::array<char, kHeaderBytes> header{};
  in_.read(header.data(), header.size());
  if (in_.gcount() != static_cast<std::streamsize>(header.size()) || header != kTimeTagMagic) {
    throw BadMagic();
  }
}

std::optional<TimeTagRecord> TimeTagReader::next() {
  std::array<std::byte, kRecordBytes> buf{};
  in_.read(reinterpret_cast<char*>(buf.data()), buf.size());
  const auto got = in_.gcount();
  if (got == 0) return std::nullopt;
  if (got != static_cast<std::streamsize>(kRecordBytes)) {
    throw TruncatedRecord(kHeaderBytes + count_ * kRecordBytes);
  }
  TimeTagRecord r = decode_checked(buf.data(), count_);
  ++count_;
  return r;
}

void write_timetag_csv(std::ostream& out, std::span<const TimeTagRecord> records) {
  out << "cycle,sequence,channel,timestamp_ns\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    check(r, i);
    out << r.cycle << ',' << r.sequence << ',' << index_of(r.channel) << ',' << r.timestamp_ns
        << '\n';
  }
}

std::vector<TimeTagRecord> read_timetag_csv(std::istream& in) {
  std::vector<TimeTagRecord> records;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "cycle,sequence,channel,timestamp_ns") throw BadMagic();
      header_seen = true;
      continue;
    }
    const std::uint64_t index = records.size();
    std::stringstream ss(line);
    std::array<unsigned long long, 4> v{};
    char comma = 0;
    ss >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3];
    if (!ss || !(ss >> std::ws).eof()) throw InvariantViolation(index, "malformed CSV row");
    if (v[0] > UINT32_MAX || v[1] > UINT16_MAX || v[2] >= kChannelCount) {
      throw InvariantViolation(index, "field out of range");
    }
    TimeTagRecord r{static_cast<std::uint32_t>(v[0]), static_cast<std::uint16_t>(v[1]),
                    static_cast<Channel>(v[2]), v[3]};
    check(r, index);
    records.push_back(r);
  }
  if (!header_seen) throw BadMagic();
  return records;
}

std::vector<TimeTagRecord> read_timetag_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  if (path.extension() == ".csv") return read_timetag_csv(in);
  TimeTagReader reader(in);
  std::vector<TimeTagRecord> records;
  while (auto r = reader.next()) records.push_back(*r);
  return records;
}

void write_timetag_file(const std::filesystem::path& path,
                        std::span<const TimeTagRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  if (path.extension() == ".csv") {
    write_timetag_csv(out, records);
  } else {
    TimeTagWriter writer(out);
    for (const auto& r : records) writer.write(r);
  }
  if (!out) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

const Window& WindowConfig::window_for(Channel ch) const {
  return (ch == Channel::Ds1 || ch == Channel::Ds2) ? s_window : as_window;
}

void WindowConfig::validate() const {
  for (const Window* w : {&s_window, &as_window}) {
    if (w->width_ns == 0) throw std::invalid_argument("window width must be > 0");
    if (std::uint64_t{w->offset_ns} + w->width_ns > kSlotPeriodNs) {
      throw std::invalid_argument(
          fmt::format("window [{}, {}) ns exceeds the 1000 ns slot", w->offset_ns,
                      std::uint64_t{w->offset_ns} + w->width_ns));
    }
  }
  if (histogram_bin_ns == 0 || kSlotPeriodNs % histogram_bin_ns != 0) {
    throw BadBinWidth(fmt::format("histogram bin {} ns does not divide 1000 ns", histogram_bin_ns));
  }
}

std::vector<SlotFlags> window_select(std::span<const TimeTagRecord> records,
                                     const WindowConfig& cfg) {
  std::vector<SlotFlags> hits;
  for (const auto& r : records) {
    if (cfg.window_for(r.channel).contains(r.timestamp_ns)) {
      hits.push_back({r.slot(), ChannelSet{r.channel}});
    }
  }
  if (!std::is_sorted(hits.begin(), hits.end(),
                      [](const SlotFlags& a, const SlotFlags& b) { return a.slot < b.slot; })) {
    std::stable_sort(hits.begin(), hits.end(),
                     [](const SlotFlags& a, const SlotFlags& b) { return a.slot < b.slot; });
  }
  std::vector<SlotFlags> out;
  for (const auto& h : hits) {
    if (!out.empty() && out.back().slot == h.slot) {
      out.back().detected |= h.detected;
    } else {
      out.push_back(h);
    }
  }
  return out;
}

CountAggregate accumulate(std::span<const SlotFlags> flags, std::uint64_t trials) {
  if (flags.size() > trials) {
    throw std::invalid_argument(
        fmt::format("{} detected slots exceed {} analysed trials", flags.size(), trials));
  }
  CountAggregate agg;
  for (const auto& f : flags) agg.record(f.detected);
  agg.record(ChannelSet{}, trials - flags.size());
  return agg;
}

std::uint64_t infer_trials(std::span<const TimeTagRecord> records) {
  if (records.empty()) return 0;
  std::uint32_t max_cycle = 0;
  for (const auto& r : records) max_cycle = std::max(max_cycle, r.cycle);
  return (std::uint64_t{max_cycle} + 1) * kSequencesPerCycle;
}

Histogram::Histogram(std::uint32_t bin_ns) : bin_ns_(bin_ns) {
  if (bin_ns == 0 || kSlotPeriodNs % bin_ns != 0) {
    throw BadBinWidth(fmt::format("histogram bin {} ns does not divide 1000 ns", bin_ns));
  }
  for (auto& c : counts_) c.assign(kSlotPeriodNs / bin_ns, 0);
}

void Histogram::add(const TimeTagRecord& r) {
  counts_[index_of(r.channel)].at(r.timestamp_ns / bin_ns_) += 1;
}

Histogram& Histogram::operator+=(const Histogram& other) {
  if (other.bin_ns_ != bin_ns_) throw BadBinWidth("cannot merge histograms with different bins");
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    for (std::size_t b = 0; b < counts_[c].size(); ++b) counts_[c][b] += other.counts_[c][b];
  }
  return *this;
}

std::uint64_t Histogram::total(Channel ch) const {
  std::uint64_t t = 0;
  for (std::uint64_t n : counts_[index_of(ch)]) t += n;
  return t;
}

void Histogram::write_csv(std::ostream& out, std::string_view config_hash) const {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "bin_start_ns,channel,count\n";
  for (Channel ch : kAllChannels) {
    const auto& c = counts_[index_of(ch)];
    for (std::size_t b = 0; b < c.size(); ++b) {
      out << b * bin_ns_ << ',' << channel_name(ch) << ',' << c[b] << '\n';
    }
  }
}

Histogram histogram(std::span<const TimeTagRecord> records, const WindowConfig& cfg) {
  Histogram h(cfg.histogram_bin_ns);
  for (const auto& r : records) h.add(r);
  return h;
}

}  // namespace phlab
