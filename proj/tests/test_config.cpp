#include <sstream>

#include <gtest/gtest.h>

#include "phlab/config.hpp"

namespace phlab {
namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.file(), "test.ini");
    return e.line();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return 0;
}

TEST(Config, DefaultsAndHashStability) {
  const RunConfig a = parse("");
  const RunConfig b = parse("# only a comment\n\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 64u);
  EXPECT_EQ(a.windows, WindowConfig{});
}

TEST(Config, FullFile) {
  const RunConfig c = parse(R"(
[source]
p_ex = 0.1
eta_s = 0.006
eta_asv = 0.007
eta_conv = 0.5
zeta = 0.55
qfc = on
[detectors]
dark_Dt1 = 1e-5
nuisance_rate = 0.01
nuisance_times_ns = 100, 900
[windows]
as_offset_ns = 310
[rng]
seed = 42
batch_size = 1000
engine = sparse
trials = 5000
[scenarios]
baseline = 1
better = 10
[io]
output_dir = out
via_timetags = true
)");
  EXPECT_NEAR(c.source.mean_pairs, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(c.source.zeta(), 0.55, 1e-12);
  EXPECT_TRUE(c.source.qfc);
  EXPECT_DOUBLE_EQ(c.source.dark_rate[index_of(Channel::Dt1)], 1e-5);
  EXPECT_EQ(c.nuisance_times_ns, (std::vector<std::uint32_t>{100, 900}));
  EXPECT_EQ(c.windows.as_window.offset_ns, 310u);
  EXPECT_EQ(c.rng.master_seed, 42u);
  EXPECT_EQ(c.engine, mc::Engine::sparse);
  EXPECT_EQ(c.trials, 5000u);
  ASSERT_EQ(c.scenarios.size(), 2u);
  EXPECT_EQ(c.scenarios[1].label, "better");
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_TRUE(c.via_timetags);
}

TEST(Config, EquivalentSpellingsHashEqual) {
  const RunConfig a = parse("[source]\nmean_pairs = 0.25\n");
  const RunConfig b = parse("[source]\np_ex = 0.2\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), parse("[source]\nmean_pairs = 0.26\n").hash());
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[source]\nbogus = 1\n"), 2u);
  EXPECT_EQ(error_line("\n\n[nosuch]\n"), 3u);
  EXPECT_EQ(error_line("[source]\neta_s = abc\n"), 2u);
  EXPECT_EQ(error_line("[source]\neta_s 0.1\n"), 2u);
  EXPECT_EQ(error_line("eta_s = 0.1\n"), 1u);
  EXPECT_EQ(error_line("[source]\np_ex = 0.1\nmean_pairs = 0.1\n"), 2u);
  EXPECT_EQ(error_line("[rng]\nseed = 1\nseed = 2\n"), 3u);
  EXPECT_EQ(error_line("[rng]\nengine = fast\n"), 2u);
  EXPECT_EQ(error_line("[detectors]\ndark_Dq1 = 0.1\n"), 2u);
  EXPECT_EQ(error_line("[scenarios]\nbad = 0\n"), 2u);
  EXPECT_EQ(error_line("[source]\neta_s = 1.5\n"), 0u);  // semantic check, whole file
  EXPECT_EQ(error_line("[windows]\nas_offset_ns = 950\n"), 0u);
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST(Config, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace phlab
