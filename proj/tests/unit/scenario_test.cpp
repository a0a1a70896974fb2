#include <gtest/gtest.h>

#include "lcdc/scenario.hpp"

namespace lcdc {
namespace {

TEST(Scenario, DefaultsRoundTrip) {
  const ScenarioConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(ScenarioConfig::parse(c.serialize()), c);
}

TEST(Scenario, EditedConfigRoundTrips) {
  ScenarioConfig c;
  c.site = SiteConfig::tiny();
  c.switches.watermarks.high = 0.6;
  c.switches.holddown = SimTime::ns(12'500);
  c.workload.locality = LocalityMix{0.2, 0.3, 0.5};
  c.run.seed = 99;
  c.run.duration = SimTime::us(1500);
  c.server.gate_nic = false;
  const std::string text = c.serialize();
  const ScenarioConfig back = ScenarioConfig::parse(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.serialize(), text);
}

TEST(Scenario, PartialFileKeepsDefaults) {
  const auto c = ScenarioConfig::parse("[run]\nseed = 7\n[workload]\nprofile = ms-dc\n");
  EXPECT_EQ(c.run.seed, 7u);
  EXPECT_EQ(c.workload.profile, "ms-dc");
  EXPECT_EQ(c.site, SiteConfig::desk());
  EXPECT_EQ(c.switches.holddown, SimTime::us(50));
}

TEST(Scenario, UnknownKeyNamed) {
  try {
    ScenarioConfig::parse("[switch]\nhigh_watermrak = 0.5\n", "x.cfg");
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("switch.high_watermrak"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ScenarioConfig::parse("[nosuch]\na = 1\n"), std::invalid_argument);
}

TEST(Scenario, BadValuesRejected) {
  EXPECT_THROW(ScenarioConfig::parse("[run]\nseed = -1\n"), std::invalid_argument);
  EXPECT_THROW(ScenarioConfig::parse("[workload]\nload = lots\n"), std::invalid_argument);
  EXPECT_THROW(ScenarioConfig::parse("[run]\nmode = sometimes\n"), std::invalid_argument);
  ScenarioConfig c;
  c.workload.load = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.switches.watermarks.low = 0.9;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.workload.profile = "youtube";
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Scenario, Overrides) {
  ScenarioConfig c;
  c.apply_override("switch.high_watermark=0.75");
  c.apply_override("run.mode=gated");
  c.apply_override("workload.locality=0.1 0.1 0.8");
  EXPECT_DOUBLE_EQ(c.switches.watermarks.high, 0.75);
  EXPECT_EQ(c.run.mode, ModeSelection::kGated);
  EXPECT_EQ(c.workload.locality, (LocalityMix{0.1, 0.1, 0.8}));
  EXPECT_THROW(c.apply_override("switch.nope=1"), std::invalid_argument);
  EXPECT_THROW(c.apply_override("no_equals_sign"), std::invalid_argument);
}

TEST(Scenario, DigestIgnoresModeAndOutput) {
  ScenarioConfig a, b;
  b.run.mode = ModeSelection::kGated;
  b.run.output_dir = "elsewhere";
  EXPECT_EQ(a.digest(), b.digest());
  b.run.seed = 2;
  EXPECT_NE(a.digest(), b.digest());
}

TEST(Scenario, SitePresets) {
  EXPECT_EQ(site_preset("full"), SiteConfig::full());
  EXPECT_EQ(site_preset("tiny"), SiteConfig::tiny());
  EXPECT_THROW(site_preset("huge"), std::invalid_argument);
}

}  // namespace
}  // namespace lcdc
