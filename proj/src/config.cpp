#include "phlab/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace phlab {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::size_t line = 0;
  std::vector<Entry> entries;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::map<std::string, Section> read_ini(std::istream& in, const std::string& file) {
  std::map<std::string, Section> sections;
  Section* current = nullptr;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(file, line_no, "unterminated section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (sections.count(name)) {
        throw ConfigError(file, line_no, fmt::format("duplicate section [{}]", name));
      }
      current = &sections[name];
      current->line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(file, line_no, "expected 'key = value'");
    if (!current) throw ConfigError(file, line_no, "key outside of any section");
    Entry e{trim(std::string_view(line).substr(0, eq)),
            trim(std::string_view(line).substr(eq + 1)), line_no};
    if (e.key.empty()) throw ConfigError(file, line_no, "empty key");
    for (const auto& prev : current->entries) {
      if (prev.key == e.key) throw ConfigError(file, line_no, fmt::format("duplicate key '{}'", e.key));
    }
    current->entries.push_back(std::move(e));
  }
  return sections;
}

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  double real(const Entry& e) const {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) fail(e, "expected a number");
    return v;
  }

  std::uint64_t integer(const Entry& e) const {
    std::uint64_t v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) fail(e, "expected a non-negative integer");
    return v;
  }

  std::uint32_t u32(const Entry& e) const {
    const std::uint64_t v = integer(e);
    if (v > UINT32_MAX) fail(e, "value too large");
    return static_cast<std::uint32_t>(v);
  }

  bool boolean(const Entry& e) const {
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    fail(e, "expected a boolean (true/false, on/off)");
  }

  [[noreturn]] void fail(const Entry& e, const std::string& what) const {
    throw ConfigError(file_, e.line, fmt::format("{}: {} (got '{}')", e.key, what, e.value));
  }

 private:
  std::string file_;
};

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

ConfigError::ConfigError(std::string file, std::size_t line, const std::string& message)
    : std::runtime_error(line ? fmt::format("{}:{}: {}", file, line, message)
                              : fmt::format("{}: {}", file, message)),
      file_(std::move(file)),
      line_(line) {}

mc::EmissionConfig RunConfig::emission() const {
  mc::EmissionConfig e;
  e.windows = windows;
  e.nuisance_rate = nuisance_rate;
  e.nuisance_times_ns = nuisance_times_ns;
  return e;
}

std::string RunConfig::canonical() const {
  std::string out;
  auto line = [&](std::string_view k, const std::string& v) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  };
  const auto& s = source;
  out += "[source]\n";
  line("mean_pairs", fmt_real(s.mean_pairs));
  line("eta_s", fmt_real(s.eta_s));
  line("eta_asv", fmt_real(s.eta_asv));
  line("eta_conv", fmt_real(s.eta_conv));
  line("noise_mean", fmt_real(s.noise_mean));
  line("qfc", s.qfc ? "true" : "false");
  line("polarization_loss", s.polarization_loss ? "true" : "false");
  out += "[detectors]\n";
  for (Channel ch : kAllChannels) {
    line(fmt::format("dark_{}", channel_name(ch)), fmt_real(s.dark_rate[index_of(ch)]));
  }
  line("nuisance_rate", fmt_real(nuisance_rate));
  line("nuisance_times_ns", fmt::format("{}", fmt::join(nuisance_times_ns, ",")));
  out += "[windows]\n";
  line("s_offset_ns", std::to_string(windows.s_window.offset_ns));
  line("s_width_ns", std::to_string(windows.s_window.width_ns));
  line("as_offset_ns", std::to_string(windows.as_window.offset_ns));
  line("as_width_ns", std::to_string(windows.as_window.width_ns));
  line("histogram_bin_ns", std::to_string(windows.histogram_bin_ns));
  out += "[rng]\n";
  line("seed", std::to_string(rng.master_seed));
  line("batch_size", std::to_string(rng.batch_size));
  line("engine", engine == mc::Engine::direct ? "direct" : "sparse");
  line("trials", std::to_string(trials));
  out += "[scenarios]\n";
  for (const auto& sc : scenarios) line(sc.label, fmt_real(sc.zeta_multiplier));
  out += "[io]\n";
  line("via_timetags", via_timetags ? "true" : "false");
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string RunConfig::hash() const { return sha256_hex(canonical()); }

RunConfig parse_config(std::istream& in, const std::string& file) {
  const auto sections = read_ini(in, file);
  const Reader rd(file);
  RunConfig cfg;

  static const std::set<std::string> kSections{"source", "detectors", "windows",
                                               "rng",    "scenarios", "io"};
  for (const auto& [name, sec] : sections) {
    if (!kSections.count(name)) {
      throw ConfigError(file, sec.line, fmt::format("unknown section [{}]", name));
    }
  }
  auto section = [&](const std::string& name) -> const std::vector<Entry>& {
    static const std::vector<Entry> kEmpty;
    auto it = sections.find(name);
    return it == sections.end() ? kEmpty : it->second.entries;
  };
  auto unknown = [&](const Entry& e, const char* sec) {
    throw ConfigError(file, e.line, fmt::format("unknown key '{}' in [{}]", e.key, sec));
  };

  std::optional<Entry> mean_pairs, p_ex, noise_mean, zeta;
  for (const auto& e : section("source")) {
    if (e.key == "mean_pairs") mean_pairs = e;
    else if (e.key == "p_ex") p_ex = e;
    else if (e.key == "noise_mean") noise_mean = e;
    else if (e.key == "zeta") zeta = e;
    else if (e.key == "eta_s") cfg.source.eta_s = rd.real(e);
    else if (e.key == "eta_asv") cfg.source.eta_asv = rd.real(e);
    else if (e.key == "eta_conv") cfg.source.eta_conv = rd.real(e);
    else if (e.key == "qfc") cfg.source.qfc = rd.boolean(e);
    else if (e.key == "polarization_loss") cfg.source.polarization_loss = rd.boolean(e);
    else unknown(e, "source");
  }
  if (mean_pairs && p_ex) rd.fail(*p_ex, "give either mean_pairs or p_ex, not both");
  if (mean_pairs) cfg.source.mean_pairs = rd.real(*mean_pairs);
  if (p_ex) {
    try {
      cfg.source.mean_pairs = mc::mean_pairs_for_excitation(rd.real(*p_ex));
    } catch (const std::invalid_argument& ex) {
      rd.fail(*p_ex, ex.what());
    }
  }
  if (noise_mean && zeta) rd.fail(*zeta, "give either noise_mean or zeta, not both");
  if (noise_mean) cfg.source.noise_mean = rd.real(*noise_mean);

  for (const auto& e : section("detectors")) {
    if (e.key.rfind("dark_", 0) == 0) {
      const auto ch = parse_channel(std::string_view(e.key).substr(5));
      if (!ch) unknown(e, "detectors");
      cfg.source.dark_rate[index_of(*ch)] = rd.real(e);
    } else if (e.key == "nuisance_rate") {
      cfg.nuisance_rate = rd.real(e);
    } else if (e.key == "nuisance_times_ns") {
      cfg.nuisance_times_ns.clear();
      std::stringstream ss(e.value);
      for (std::string item; std::getline(ss, item, ',');) {
        Entry sub = e;
        sub.value = trim(item);
        cfg.nuisance_times_ns.push_back(rd.u32(sub));
      }
    } else {
      unknown(e, "detectors");
    }
  }

  for (const auto& e : section("windows")) {
    if (e.key == "s_offset_ns") cfg.windows.s_window.offset_ns = rd.u32(e);
    else if (e.key == "s_width_ns") cfg.windows.s_window.width_ns = rd.u32(e);
    else if (e.key == "as_offset_ns") cfg.windows.as_window.offset_ns = rd.u32(e);
    else if (e.key == "as_width_ns") cfg.windows.as_window.width_ns = rd.u32(e);
    else if (e.key == "histogram_bin_ns") cfg.windows.histogram_bin_ns = rd.u32(e);
    else unknown(e, "windows");
  }

  for (const auto& e : section("rng")) {
    if (e.key == "seed") cfg.rng.master_seed = rd.integer(e);
    else if (e.key == "batch_size") cfg.rng.batch_size = rd.integer(e);
    else if (e.key == "trials") cfg.trials = rd.integer(e);
    else if (e.key == "engine") {
      if (e.value == "direct") cfg.engine = mc::Engine::direct;
      else if (e.value == "sparse") cfg.engine = mc::Engine::sparse;
      else rd.fail(e, "expected 'direct' or 'sparse'");
    } else {
      unknown(e, "rng");
    }
  }

  for (const auto& e : section("scenarios")) {
    const double m = rd.real(e);
    if (!(m > 0.0)) rd.fail(e, "zeta multiplier must be > 0");
    cfg.scenarios.push_back({m, e.key});
  }

  for (const auto& e : section("io")) {
    if (e.key == "output_dir") cfg.output_dir = e.value;
    else if (e.key == "via_timetags") cfg.via_timetags = rd.boolean(e);
    else unknown(e, "io");
  }

  // Zeta is referred to the converter input, after any polarization loss.
  if (zeta) {
    const double z = rd.real(*zeta);
    if (!(z > 0.0)) rd.fail(*zeta, "zeta must be > 0");
    cfg.source.noise_mean = mc::noise_mean_for_zeta(cfg.source, z);
  }

  try {
    cfg.source.validate();
    cfg.emission().validate();
    if (cfg.rng.batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
    if (cfg.trials == 0) throw std::invalid_argument("trials must be > 0");
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(file, 0, ex.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open configuration file");
  return parse_config(in, path.string());
}

}  // namespace phlab
