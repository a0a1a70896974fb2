#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "lcdc/scenario.hpp"
#include "lcdc/traffic.hpp"

namespace lcdc {
namespace {

TEST(EmpiricalCdf, Interpolation) {
  const EmpiricalCdf c({{100, 0.5}, {300, 1.0}});
  EXPECT_DOUBLE_EQ(c.sample(0.75), 200.0);
  EXPECT_DOUBLE_EQ(c.sample(0.0), 100.0);
  EXPECT_DOUBLE_EQ(c.sample(0.3), 100.0);  // point mass at the first value
  EXPECT_NEAR(c.sample(std::nextafter(1.0, 0.0)), 300.0, 1e-9);
  EXPECT_DOUBLE_EQ(c.evaluate(200), 0.75);
  EXPECT_DOUBLE_EQ(c.evaluate(99), 0.0);
  EXPECT_DOUBLE_EQ(c.evaluate(300), 1.0);
  // 0.5 x 100 + 0.5 x 200
  EXPECT_DOUBLE_EQ(c.mean(), 150.0);
}

TEST(EmpiricalCdf, SamplesStayInSupport) {
  const EmpiricalCdf c({{64, 0.0}, {1000, 0.4}, {1e6, 1.0}});
  TrafficRng rng(3);
  for (int i = 0; i < 10'000; ++i) {
    const double v = c.sample(rng.uniform());
    ASSERT_GE(v, 64.0);
    ASSERT_LE(v, 1e6);
  }
}

TEST(EmpiricalCdf, RejectsInvalid) {
  EXPECT_THROW(EmpiricalCdf(std::vector<std::pair<double, double>>{}), std::invalid_argument);
  EXPECT_THROW(EmpiricalCdf({{1, 0.5}, {2, 0.4}, {3, 1.0}}), std::invalid_argument);
  EXPECT_THROW(EmpiricalCdf({{2, 0.5}, {1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(EmpiricalCdf({{1, 0.5}, {2, 0.9}}), std::invalid_argument);
}

TEST(Profiles, ShippedFilesLoad) {
  for (const auto& name : builtin_profiles()) {
    const auto p = load_profile(name, LCDC_DATA_DIR);
    EXPECT_GE(p.flow_size_cdf.points().size(), 5u) << name;
    EXPECT_GT(p.flow_interval_cdf.mean(), 0.0) << name;
    EXPECT_NO_THROW(p.locality.validate());
  }
  EXPECT_THROW(load_profile("nope", LCDC_DATA_DIR), std::invalid_argument);
}

TEST(Profiles, LocalityDefaults) {
  EXPECT_EQ(default_locality("fb-web"), (LocalityMix{0.1, 0.5, 0.4}));
  EXPECT_EQ(default_locality("fb-cache"), (LocalityMix{0.05, 0.7, 0.25}));
  EXPECT_EQ(default_locality("fb-hadoop"), (LocalityMix{0.6, 0.3, 0.1}));
  EXPECT_EQ(default_locality("ms-dc"), (LocalityMix{0.5, 0.4, 0.1}));
}

TEST(Pearson, Basics) {
  const std::vector<double> a{0.1, 0.4, 0.8, 1.0};
  std::vector<double> refl;
  for (double v : a) refl.push_back(1.0 - v);
  EXPECT_NEAR(pearson_r(a, a), 1.0, 1e-12);
  EXPECT_NEAR(pearson_r(a, refl), -1.0, 1e-12);
  const std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(pearson_r(a, flat), std::domain_error);
}

TEST(Generate, DeterministicAndWellFormed) {
  const Topology topo = build_site(SiteConfig::desk());
  const auto prof = load_profile("fb-web", LCDC_DATA_DIR);
  TrafficRng r1(11), r2(11);
  const auto a = generate(prof, topo, SimTime::ms(2), r1, 1.0);
  const auto b = generate(prof, topo, SimTime::ms(2), r2, 1.0);
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, i);
    EXPECT_NE(a[i].src, a[i].dst);
    EXPECT_GE(a[i].size_bytes, 1u);
    EXPECT_LT(a[i].arrival, SimTime::ms(2));
    if (i) EXPECT_LE(a[i - 1].arrival, a[i].arrival);
  }
  TrafficRng r3(11);
  EXPECT_TRUE(generate(prof, topo, SimTime{}, r3).empty());
}

TEST(Generate, LoadScalingHitsTarget) {
  const Topology topo = build_site(SiteConfig::desk());
  const auto prof = load_profile("fb-web", LCDC_DATA_DIR);
  const double scale = interval_scale_for_load(prof, 0.3, 10e9);
  TrafficRng rng(5);
  const SimTime dur = SimTime::ms(200);
  const auto flows = generate(prof, topo, dur, rng, scale);
  double bits = 0;
  for (const auto& f : flows) bits += static_cast<double>(f.size_bytes) * 8.0;
  const double per_server = bits / dur.seconds() / static_cast<double>(topo.servers().size());
  // Heavy tails make this noisy; 15% is ample at 200 ms.
  EXPECT_NEAR(per_server / 10e9, 0.3, 0.045);
}

TEST(PickDestination, FollowsLocalityMix) {
  const SiteConfig site = SiteConfig::desk();  // 4 per rack, 16 per cluster, 32 total
  const LocalityMix mix{0.2, 0.3, 0.5};
  TrafficRng rng(9);
  std::map<int, int> scope;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const std::uint32_t src = 5;
    const std::uint32_t d = pick_destination(site, src, mix, rng);
    ASSERT_NE(d, src);
    ASSERT_LT(d, 32u);
    scope[d / 4 == src / 4 ? 0 : (d / 16 == src / 16 ? 1 : 2)]++;
  }
  EXPECT_NEAR(scope[0] / double(n), 0.2, 0.01);
  EXPECT_NEAR(scope[1] / double(n), 0.3, 0.01);
  EXPECT_NEAR(scope[2] / double(n), 0.5, 0.01);
}

TEST(PickDestination, WidensEmptyScope) {
  SiteConfig site = SiteConfig::tiny();  // one cluster
  site.servers_per_rack = 1;
  TrafficRng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(pick_destination(site, 0, LocalityMix{1.0, 0.0, 0.0}, rng), 1u);
  }
}

TEST(Fidelity, SelfFidelityOnShippedProfiles) {
  TrafficRng rng(77);
  for (const auto& name : builtin_profiles()) {
    const auto p = load_profile(name, LCDC_DATA_DIR);
    std::vector<double> s;
    for (int i = 0; i < 20'000; ++i) s.push_back(p.flow_size_cdf.sample(rng.uniform()));
    EXPECT_GE(cdf_fidelity(s, p.flow_size_cdf), 0.99) << name;
  }
}

TEST(Fidelity, DetectsWrongDistribution) {
  const EmpiricalCdf target({{1, 0.0}, {1000, 1.0}});
  std::vector<double> s(1000, 999.0);
  EXPECT_LT(cdf_fidelity(s, target), 0.9);
}

TEST(Trace, OneRecord) {
  std::istringstream in("0.000100 A B 4000\n");
  const auto t = parse_trace(in, 32);
  ASSERT_EQ(t.flows.size(), 1u);
  EXPECT_EQ(t.flows[0].arrival, SimTime::us(100));
  EXPECT_EQ(t.flows[0].size_bytes, 4000u);
  EXPECT_NE(t.flows[0].src, t.flows[0].dst);
}

TEST(Trace, EmptyAndConsistentHashing) {
  std::istringstream empty("");
  EXPECT_TRUE(parse_trace(empty, 8).flows.empty());
  const auto t = load_trace(LCDC_TEST_DATA_DIR "/sample_trace.txt", 32);
  ASSERT_EQ(t.flows.size(), 3u);
  EXPECT_EQ(t.flows[0].src, t.flows[2].src);  // host A
  EXPECT_EQ(t.flows[0].dst, t.flows[1].src);  // host B
}

TEST(Trace, TooManyMalformedLinesRejected) {
  std::ostringstream text;
  for (int i = 0; i < 99; ++i) text << "0.1 a b 100\n";
  text << "garbage\n";
  std::istringstream ok(text.str());
  EXPECT_EQ(parse_trace(ok, 8).malformed_lines, std::vector<std::size_t>{100});
  text << "0.1 a b -5\n";
  std::istringstream bad(text.str());
  try {
    parse_trace(bad, 8);
    FAIL() << "expected rejection";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("100 101"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace lcdc
