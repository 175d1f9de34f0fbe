#include <gtest/gtest.h>

#include "relaxbp/config.hpp"

namespace {

using namespace relaxbp;
using K = DetectorKind;

TEST(Config, Defaults) {
  ExperimentConfig c;
  c.finalize();
  EXPECT_EQ(c.sweep.snr_points_db, (std::vector<double>{0, 2, 4, 6, 8, 10, 12}));
  ASSERT_EQ(c.sweep.detectors.size(), 1U);
  EXPECT_EQ(c.sweep.detectors[0].kind, K::SBP);
}

TEST(Config, ParsesKeysAndDetectors) {
  const ExperimentConfig c = parse_config(R"(
# comment
nt = 8
nr = 6   # trailing comment
m = 2
snr_min = 1.5
snr_max = 4
snr_step = 0.5
seed = 99
record_ami = yes

[detector]
kind = rbp
iterations = 7
rd1 = 2
rd2 = 1

[detector]
kind = MMSE_SIC
)");
  EXPECT_EQ(c.sweep.dims, (SystemDims{8, 6, 2}));
  EXPECT_EQ(c.sweep.master_seed, 99U);
  EXPECT_TRUE(c.sweep.record_ami);
  EXPECT_EQ(c.snr_grid(), (std::vector<double>{1.5, 2, 2.5, 3, 3.5, 4}));
  ASSERT_EQ(c.sweep.detectors.size(), 2U);
  EXPECT_EQ(c.sweep.detectors[0], (DetectorSpec{K::RBP, 7, 2, 1}));
  EXPECT_EQ(c.sweep.detectors[1].kind, K::MMSE_SIC);
}

TEST(Config, RoundTrip) {
  for (std::string_view name : kPresetNames) {
    const ExperimentConfig c = *preset(name);
    const ExperimentConfig back = parse_config(format_config(c));
    EXPECT_EQ(format_config(back), format_config(c)) << name;
    EXPECT_EQ(back.sweep.detectors, c.sweep.detectors);
    EXPECT_EQ(back.snr_grid(), c.snr_grid());
  }
}

TEST(Config, LayersOverBase) {
  const ExperimentConfig base = *preset("fig5");
  const ExperimentConfig c = parse_config("seed = 5\nsnr_max = 8\n", base);
  EXPECT_EQ(c.sweep.master_seed, 5U);
  EXPECT_EQ(c.snr_max, 8.0);
  EXPECT_EQ(c.sweep.detectors, base.sweep.detectors);  // no [detector] section
  const ExperimentConfig d = parse_config("[detector]\nkind = ML\n", base);
  ASSERT_EQ(d.sweep.detectors.size(), 1U);
  EXPECT_EQ(d.sweep.detectors[0].kind, K::ML);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("nt 4\n"), ConfigError);
  EXPECT_THROW(parse_config("nt = four\n"), ConfigError);
  EXPECT_THROW(parse_config("nt = -4\n"), ConfigError);
  EXPECT_THROW(parse_config("snr_min = 1x\n"), ConfigError);
  EXPECT_THROW(parse_config("record_ami = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("[channel]\n"), ConfigError);
  EXPECT_THROW(parse_config("[detector]\nkind = foo\n"), ConfigError);
  EXPECT_THROW(parse_config("[detector]\nnt = 4\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/relaxbp.cfg"), ConfigError);
  try {
    parse_config("nt = 4\n\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, FinalizeValidates) {
  ExperimentConfig c = parse_config("nt = 2\n[detector]\nkind = RBP\nrd1 = 2\n");
  EXPECT_THROW(c.finalize(), Error);
  ExperimentConfig d = parse_config("snr_step = 0\n");
  EXPECT_THROW(d.finalize(), ConfigError);
  ExperimentConfig e = parse_config("snr_min = 5\nsnr_max = 1\n");
  EXPECT_THROW(e.finalize(), ConfigError);
  ExperimentConfig f = parse_config("m = 3\n");
  EXPECT_THROW(f.finalize(), Error);
}

TEST(Presets, AllKnownOnesFinalize) {
  for (std::string_view name : kPresetNames) {
    auto c = preset(name);
    ASSERT_TRUE(c) << name;
    EXPECT_NO_THROW(c->finalize()) << name;
  }
  EXPECT_FALSE(preset("fig4"));
  EXPECT_EQ(preset("fig6")->sweep.dims.n_tx, 8U);
  EXPECT_TRUE(preset("fig7")->sweep.record_ami);
  EXPECT_TRUE(preset("fig8")->sweep.record_convergence);
}

}  // namespace
