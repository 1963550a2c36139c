#include "phlab/channels.hpp"

namespace phlab {

namespace {
constexpr std::array<std::string_view, kChannelCount> kNames{"Ds1", "Ds2", "Dv1",
                                                             "Dv2", "Dt1", "Dt2"};
}

std::string_view channel_name(Channel ch) { return kNames.at(index_of(ch)); }

std::optional<Channel> parse_channel(std::string_view name) {
  for (Channel ch : kAllChannels) {
    if (kNames[index_of(ch)] == name) return ch;
  }
  return std::nullopt;
}

std::string ChannelSet::to_string() const {
  std::string out = "{";
  for (Channel ch : kAllChannels) {
    if (!contains(ch)) continue;
    if (out.size() > 1) out += ',';
    out += channel_name(ch);
  }
  out += '}';
  return out;
}

}  // namespace phlab
