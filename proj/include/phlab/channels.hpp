#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace phlab {

// Physical detector channels. The numeric values are part of the time-tag
// file format and must not change.
enum class Channel : std::uint8_t {
  Ds1 = 0,  // Stokes, HBS arm 1
  Ds2 = 1,  // Stokes, HBS arm 2
  Dv1 = 2,  // anti-Stokes at 780 nm, arm 1
  Dv2 = 3,  // anti-Stokes at 780 nm, arm 2
  Dt1 = 4,  // converted anti-Stokes at 1522 nm, arm 1
  Dt2 = 5,  // converted anti-Stokes at 1522 nm, arm 2
};

inline constexpr std::size_t kChannelCount = 6;

inline constexpr std::array<Channel, kChannelCount> kAllChannels{
    Channel::Ds1, Channel::Ds2, Channel::Dv1,
    Channel::Dv2, Channel::Dt1, Channel::Dt2};

constexpr std::size_t index_of(Channel ch) { return static_cast<std::size_t>(ch); }

std::string_view channel_name(Channel ch);
std::optional<Channel> parse_channel(std::string_view name);

/// Small set of channels, stored as a 6-bit mask. Used both for click
/// patterns of a single write slot and for "any of" detector groups.
class ChannelSet {
 public:
  constexpr ChannelSet() = default;
  constexpr ChannelSet(std::initializer_list<Channel> channels) {
    for (Channel ch : channels) bits_ |= bit(ch);
  }

  static constexpr ChannelSet from_bits(std::uint8_t bits) {
    ChannelSet s;
    s.bits_ = static_cast<std::uint8_t>(bits & kMask);
    return s;
  }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(Channel ch) const { return (bits_ & bit(ch)) != 0; }
  constexpr bool intersects(ChannelSet other) const { return (bits_ & other.bits_) != 0; }
  constexpr bool includes(ChannelSet other) const { return (bits_ & other.bits_) == other.bits_; }

  constexpr std::size_t size() const {
    std::size_t n = 0;
    for (std::uint8_t b = bits_; b != 0; b &= static_cast<std::uint8_t>(b - 1)) ++n;
    return n;
  }

  constexpr void insert(Channel ch) { bits_ |= bit(ch); }

  constexpr ChannelSet operator|(ChannelSet other) const {
    return from_bits(static_cast<std::uint8_t>(bits_ | other.bits_));
  }
  constexpr ChannelSet operator&(ChannelSet other) const {
    return from_bits(static_cast<std::uint8_t>(bits_ & other.bits_));
  }
  constexpr ChannelSet& operator|=(ChannelSet other) {
    bits_ |= other.bits_;
    return *this;
  }

  friend constexpr bool operator==(ChannelSet, ChannelSet) = default;

  std::string to_string() const;

 private:
  static constexpr std::uint8_t kMask = (1u << kChannelCount) - 1u;
  static constexpr std::uint8_t bit(Channel ch) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(ch));
  }

  std::uint8_t bits_ = 0;
};

// Logical modes: a detection "by D_i1 or D_i2".
inline constexpr ChannelSet kModeS{Channel::Ds1, Channel::Ds2};
inline constexpr ChannelSet kModeAsv{Channel::Dv1, Channel::Dv2};
inline constexpr ChannelSet kModeAst{Channel::Dt1, Channel::Dt2};

}  // namespace phlab
