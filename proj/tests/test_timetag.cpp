#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "phlab/timetag.hpp"

namespace phlab {
namespace {

std::vector<std::byte> bytes_of(std::initializer_list<int> v) {
  std::vector<std::byte> out;
  for (int b : v) out.push_back(static_cast<std::byte>(b));
  return out;
}

std::vector<TimeTagRecord> random_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TimeTagRecord> out(n);
  for (auto& r : out) {
    r.cycle = static_cast<std::uint32_t>(rng());
    r.sequence = static_cast<std::uint16_t>(rng() % kSequencesPerCycle);
    r.channel = static_cast<Channel>(rng() % kChannelCount);
    r.timestamp_ns = rng() % kSlotPeriodNs;
  }
  return out;
}

TEST(Encode, EmptyStreamIsHeaderOnly) {
  const auto bytes = encode_stream({});
  EXPECT_EQ(bytes, bytes_of({'P', 'H', 'T', 'T', '0', '0', '0', '1'}));
  EXPECT_TRUE(parse_stream(bytes).empty());
}

TEST(Encode, OneRecordHexDump) {
  // 50 48 54 54 30 30 30 31 | 01 00 00 00 02 00 02 00 5e 01 00 00 00 00 00 00
  const TimeTagRecord r{1, 2, Channel::Dv1, 350};
  const auto bytes = encode_stream(std::span(&r, 1));
  EXPECT_EQ(bytes, bytes_of({0x50, 0x48, 0x54, 0x54, 0x30, 0x30, 0x30, 0x31, 0x01, 0x00, 0x00,
                             0x00, 0x02, 0x00, 0x02, 0x00, 0x5e, 0x01, 0x00, 0x00, 0x00, 0x00,
                             0x00, 0x00}));
  const auto back = parse_stream(bytes);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(Encode, RoundTripProperty) {
  const auto recs = random_records(100'000, 1);
  EXPECT_EQ(parse_stream(encode_stream(recs)), recs);
}

TEST(Encode, MillionRecordRoundTrip) {
  const auto recs = random_records(1'000'000, 2);
  const auto t0 = std::chrono::steady_clock::now();
  const auto bytes = encode_stream(recs);
  const auto back = parse_stream(bytes);
  const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(back, recs);
  RecordProperty("records_per_second", static_cast<int>(2e6 / std::max(dt, 1e-9)));
}

TEST(Parse, BadMagic) {
  auto bytes = encode_stream({});
  bytes[7] = std::byte{'2'};
  EXPECT_THROW(parse_stream(bytes), BadMagic);
  EXPECT_THROW(parse_stream(std::span(bytes).first(3)), BadMagic);
}

TEST(Parse, TruncationAlwaysDetected) {
  const auto recs = random_records(5, 3);
  const auto bytes = encode_stream(recs);
  for (std::size_t cut = kHeaderBytes; cut < bytes.size(); ++cut) {
    const auto part = std::span(bytes).first(cut);
    if ((cut - kHeaderBytes) % kRecordBytes == 0) {
      EXPECT_EQ(parse_stream(part).size(), (cut - kHeaderBytes) / kRecordBytes);
      continue;
    }
    try {
      parse_stream(part);
      FAIL() << "cut at " << cut << " not detected";
    } catch (const TruncatedRecord& e) {
      EXPECT_EQ(e.byte_offset(), kHeaderBytes + (cut - kHeaderBytes) / kRecordBytes * kRecordBytes);
    }
  }
}

TEST(Parse, InvariantViolations) {
  const auto recs = random_records(3, 4);
  auto bytes = encode_stream(recs);
  auto bad_channel = bytes;
  bad_channel[kHeaderBytes + kRecordBytes + 6] = std::byte{6};
  try {
    parse_stream(bad_channel);
    FAIL();
  } catch (const InvariantViolation& e) {
    EXPECT_EQ(e.record_index(), 1u);
  }
  auto bad_reserved = bytes;
  bad_reserved[kHeaderBytes + 2 * kRecordBytes + 7] = std::byte{1};
  EXPECT_THROW(parse_stream(bad_reserved), InvariantViolation);
  TimeTagRecord late{0, 0, Channel::Ds1, 1000};
  EXPECT_THROW(parse_stream(encode_stream(std::span(&late, 1))), InvariantViolation);
  TimeTagRecord seq{0, 990, Channel::Ds1, 10};
  EXPECT_FALSE(is_valid(seq));
}

TEST(Stream, ReaderAndWriter) {
  const auto recs = random_records(1000, 5);
  std::stringstream ss;
  TimeTagWriter w(ss);
  for (const auto& r : recs) w.write(r);
  EXPECT_EQ(w.records_written(), recs.size());
  TimeTagReader rd(ss);
  std::vector<TimeTagRecord> back;
  while (auto r = rd.next()) back.push_back(*r);
  EXPECT_EQ(back, recs);
}

TEST(Files, BinaryAndCsvByExtension) {
  const auto dir = std::filesystem::temp_directory_path() / "phlab_timetag_test";
  std::filesystem::create_directories(dir);
  const auto recs = random_records(500, 6);
  write_timetag_file(dir / "a.bin", recs);
  write_timetag_file(dir / "a.csv", recs);
  EXPECT_EQ(read_timetag_file(dir / "a.bin"), recs);
  EXPECT_EQ(read_timetag_file(dir / "a.csv"), recs);
  std::ifstream csv(dir / "a.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "cycle,sequence,channel,timestamp_ns");
  std::filesystem::remove_all(dir);
}

TEST(Windows, HalfOpenBoundaries) {
  const WindowConfig cfg;
  const std::vector<TimeTagRecord> recs{{0, 0, Channel::Dv1, 351},
                                        {0, 1, Channel::Dv1, 299},
                                        {0, 2, Channel::Dv1, 300},
                                        {0, 3, Channel::Dv1, 400},
                                        {0, 4, Channel::Ds1, 749},
                                        {0, 5, Channel::Ds1, 750}};
  const auto flags = window_select(recs, cfg);
  std::vector<std::uint64_t> slots;
  for (const auto& f : flags) slots.push_back(f.slot);
  EXPECT_EQ(slots, (std::vector<std::uint64_t>{0, 2, 4}));
}

TEST(Windows, MultipleTagsInOneSlotCountOnce) {
  const WindowConfig cfg;
  const std::vector<TimeTagRecord> recs{{2, 7, Channel::Ds2, 600},
                                        {2, 7, Channel::Ds2, 610},
                                        {2, 7, Channel::Dt1, 320},
                                        {2, 7, Channel::Dt1, 120}};
  const auto flags = window_select(recs, cfg);
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].slot, 2u * kSequencesPerCycle + 7);
  EXPECT_EQ(flags[0].detected, (ChannelSet{Channel::Ds2, Channel::Dt1}));
  const auto agg = accumulate(flags, 3 * kSequencesPerCycle);
  EXPECT_EQ(agg.trials(), 3u * kSequencesPerCycle);
  EXPECT_EQ(agg.singles(Channel::Ds2), 1u);
  EXPECT_EQ(agg.coincidences({kModeS, kModeAst}), 1u);
}

TEST(Windows, GeneratorGroundTruth) {
  // Known placement: in-window tags for a chosen click set plus stray tags
  // outside every window. Flags must reproduce the click sets exactly.
  std::mt19937_64 rng(7);
  const WindowConfig cfg;
  std::vector<TimeTagRecord> recs;
  std::vector<SlotFlags> truth;
  for (std::uint64_t slot = 0; slot < 20'000; ++slot) {
    ChannelSet clicks = ChannelSet::from_bits(static_cast<std::uint8_t>(rng() % 64));
    if (rng() % 4 != 0) clicks = {};
    for (Channel ch : kAllChannels) {
      if (clicks.contains(ch)) {
        const Window& w = cfg.window_for(ch);
        recs.push_back(make_record(slot, ch, w.offset_ns + rng() % w.width_ns));
      }
      if (rng() % 10 == 0) recs.push_back(make_record(slot, ch, 120));  // stray peak
    }
    if (!clicks.empty()) truth.push_back({slot, clicks});
  }
  std::shuffle(recs.begin(), recs.end(), rng);
  EXPECT_EQ(window_select(recs, cfg), truth);
  CountAggregate expected;
  for (const auto& f : truth) expected.record(f.detected);
  expected.record({}, 20'000 - truth.size());
  EXPECT_EQ(accumulate(truth, 20'000), expected);
}

TEST(Windows, AccumulateIsAdditiveOverFiles) {
  const WindowConfig cfg;
  auto a = random_records(3000, 8);
  auto b = random_records(3000, 9);
  for (auto& r : a) r.cycle %= 10;
  for (auto& r : b) r.cycle = 10 + r.cycle % 10;
  std::vector<TimeTagRecord> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const std::uint64_t half = 10 * kSequencesPerCycle;
  EXPECT_EQ(accumulate(window_select(all, cfg), 2 * half),
            accumulate(window_select(a, cfg), half) + accumulate(window_select(b, cfg), half));
  EXPECT_EQ(infer_trials(all), 2 * half);
}

TEST(Windows, ConfigValidation) {
  WindowConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.as_window = {950, 100};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.s_window.width_ns = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Histogram, SingleRecord) {
  const WindowConfig cfg;
  const std::vector<TimeTagRecord> recs{{0, 0, Channel::Dv1, 350}};
  const auto h = histogram(recs, cfg);
  EXPECT_EQ(h.bins(), 100u);
  EXPECT_EQ(h.count(Channel::Dv1, 35), 1u);
  EXPECT_EQ(h.total(Channel::Dv1), 1u);
  std::stringstream ss;
  h.write_csv(ss, "x");
  EXPECT_NE(ss.str().find("bin_start_ns,channel,count"), std::string::npos);
  EXPECT_NE(ss.str().find("350,Dv1,1"), std::string::npos);
}

TEST(Histogram, BadBinWidth) {
  EXPECT_THROW(Histogram(7), BadBinWidth);
  EXPECT_THROW(Histogram(0), BadBinWidth);
  EXPECT_NO_THROW(Histogram(25));
}

TEST(Histogram, UniformRecordsAreFlat) {
  std::mt19937_64 rng(10);
  const std::size_t n = 1'000'000;
  std::vector<TimeTagRecord> recs(n);
  for (auto& r : recs) r = {0, 0, Channel::Ds1, rng() % kSlotPeriodNs};
  WindowConfig cfg;
  cfg.histogram_bin_ns = 20;
  const auto h = histogram(recs, cfg);
  const double expect = static_cast<double>(n) / h.bins();
  const double p = 1.0 / h.bins();
  for (std::size_t b = 0; b < h.bins(); ++b) {
    // Per-bin 3 sigma, widened for the 50 simultaneous comparisons.
    EXPECT_NEAR(static_cast<double>(h.count(Channel::Ds1, b)), expect,
                4.0 * std::sqrt(n * p * (1 - p)));
  }
  EXPECT_EQ(h.total(Channel::Ds1), n);
}

TEST(Histogram, MergeIsCommutative) {
  const WindowConfig cfg;
  const auto a = random_records(1000, 11);
  const auto b = random_records(1000, 12);
  Histogram ab = histogram(a, cfg);
  ab += histogram(b, cfg);
  Histogram ba = histogram(b, cfg);
  ba += histogram(a, cfg);
  EXPECT_EQ(ab, ba);
}

}  // namespace
}  // namespace phlab
