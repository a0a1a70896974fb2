#include <gtest/gtest.h>

#include <map>

#include "lcdc/simulation.hpp"

namespace lcdc {
namespace {

ScenarioConfig tiny_config() {
  ScenarioConfig c;
  c.site = SiteConfig::tiny();
  c.site.csw_ring_links = 2;
  c.site.fc_ring_links = 0;
  c.workload.profile = "fb-cache";
  c.workload.load = 0.2;
  c.workload.data_dir = LCDC_DATA_DIR;
  c.run.duration = SimTime::ms(2);
  c.run.exact_latency = true;
  return c;
}

RunMetrics run_one(const ScenarioConfig& c, RunMode mode, std::vector<FlowSpec> flows) {
  Simulation sim(c, mode, std::move(flows));
  return sim.run();
}

// Server -> RSW (80 ns + 10 ns) -> pipeline -> RSW -> server (80 ns + 10 ns).
TEST(Simulation, SameRackDeliveryTime) {
  const auto c = tiny_config();
  const auto m = run_one(c, RunMode::kAlwaysOn, {FlowSpec{0, 0, 1, 100, SimTime::us(1)}});
  ASSERT_EQ(m.packets_delivered, 1u);
  const SimTime network = SimTime::ns(90) + switch_pipeline_delay() + SimTime::ns(90);
  EXPECT_EQ(network, SimTime::ps(221'342));
  EXPECT_EQ(m.network_latency.samples().front(), network.ticks());
  EXPECT_EQ(m.packet_latency.samples().front(), (SimTime::ns(3200) + network).ticks());
  EXPECT_EQ(m.flow_completion.front(), SimTime::us(1) + SimTime::ns(3200) + network);
}

// Adds RSW -> CSW and CSW -> RSW hops (80 ns + 100 ns each) and two more pipelines.
TEST(Simulation, CrossRackDeliveryTime) {
  const auto c = tiny_config();
  const auto m = run_one(c, RunMode::kAlwaysOn, {FlowSpec{0, 0, 2, 100, SimTime::us(1)}});
  ASSERT_EQ(m.packets_delivered, 1u);
  const SimTime network = SimTime::ns(90 + 180 + 180 + 90) + switch_pipeline_delay() * 3;
  EXPECT_EQ(m.network_latency.samples().front(), network.ticks());
}

TEST(Simulation, GatedSingleFlowStillArrives) {
  const auto c = tiny_config();
  const auto m = run_one(c, RunMode::kGated, {FlowSpec{0, 0, 2, 4000, SimTime::us(1)}});
  EXPECT_EQ(m.packets_delivered, 3u);
  EXPECT_EQ(m.flows_completed, 1u);
  EXPECT_EQ(m.drops.total_data(), 0u);
  EXPECT_EQ(m.connectivity_failures, 0u);
}

TEST(Simulation, EmptyWorkloadRuns) {
  const auto c = tiny_config();
  const auto m = run_one(c, RunMode::kGated, {});
  EXPECT_EQ(m.packets_injected, 0u);
  EXPECT_EQ(m.flows_injected, 0u);
  EXPECT_GT(m.headline_energy_j, 0.0);
}

TEST(Simulation, ConservationAndDrain) {
  auto c = tiny_config();
  for (RunMode mode : {RunMode::kGated, RunMode::kAlwaysOn}) {
    const Topology topo = build_site(c.site);
    auto flows = build_workload(c, topo);
    ASSERT_FALSE(flows.empty());
    std::erase_if(flows, [](const FlowSpec& f) { return f.arrival >= SimTime::ms(1); });
    const auto m = run_one(c, mode, flows);
    EXPECT_EQ(m.packets_injected, m.packets_delivered + m.packets_in_flight + m.drops.total_data());
    EXPECT_EQ(m.flows_injected, flows.size());
    // A lightly loaded site drains well within the second millisecond.
    EXPECT_EQ(m.packets_in_flight, 0u) << to_string(mode);
    if (m.drops.total_data() == 0) EXPECT_EQ(m.flows_completed, flows.size());
    EXPECT_DOUBLE_EQ(ledger_total(m.ledger, true), m.headline_energy_j);
    EXPECT_DOUBLE_EQ(ledger_total(m.ledger, false), m.total_energy_j);
  }
}

TEST(Simulation, Deterministic) {
  auto c = tiny_config();
  const auto a = run_scenario(c, RunMode::kGated);
  const auto b = run_scenario(c, RunMode::kGated);
  EXPECT_EQ(a.trace_hash, b.trace_hash);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.flow_completion, b.flow_completion);
  EXPECT_EQ(a.headline_energy_j, b.headline_energy_j);
  c.run.seed = 2;
  EXPECT_NE(run_scenario(c, RunMode::kGated).trace_hash, a.trace_hash);
}

TEST(Simulation, BaselineIgnoresGatingSettings) {
  auto c = tiny_config();
  const auto a = run_scenario(c, RunMode::kAlwaysOn);
  c.switches.watermarks = Watermarks{0.5, 0.1};
  c.switches.holddown = SimTime::us(5);
  c.server.gate_nic = false;
  const auto b = run_scenario(c, RunMode::kAlwaysOn);
  EXPECT_EQ(a.trace_hash, b.trace_hash);
  EXPECT_EQ(a.flow_completion, b.flow_completion);
  EXPECT_EQ(a.stage_activations, 0u);
  EXPECT_EQ(a.control_frames_sent, 0u);
}

TEST(Simulation, NicGatingCostsNoLatency) {
  auto c = tiny_config();
  c.server.gate_nic = true;
  const auto gated_nic = run_scenario(c, RunMode::kGated);
  c.server.gate_nic = false;
  const auto open_nic = run_scenario(c, RunMode::kGated);
  EXPECT_EQ(gated_nic.flow_completion, open_nic.flow_completion);
  EXPECT_LT(gated_nic.total_energy_j, open_nic.total_energy_j);
}

TEST(Simulation, GatingSavesEnergy) {
  const auto c = tiny_config();
  const auto g = run_scenario(c, RunMode::kGated);
  const auto b = run_scenario(c, RunMode::kAlwaysOn);
  const auto r = savings_report(g, b);
  EXPECT_GT(r.transceiver_savings, 0.0);
  EXPECT_LT(r.transceiver_savings, 1.0);
  EXPECT_EQ(g.connectivity_failures, 0u);
  EXPECT_GT(g.connectivity_probes, 0u);
}

TEST(Simulation, StageHooksTrackActiveStage) {
  auto c = tiny_config();
  c.workload.load = 0.9;
  std::map<NodeId, std::uint32_t> stage;
  std::uint64_t moves = 0;
  SimulationHooks hooks;
  hooks.on_stage_change = [&](SimTime, NodeId sw, std::uint32_t active) {
    EXPECT_GE(active, 1u);
    auto [it, fresh] = stage.try_emplace(sw, 1);
    if (it->second != active) ++moves;
    it->second = active;
  };
  const auto m = run_scenario(c, RunMode::kGated, hooks);
  EXPECT_GT(m.stage_activations, 0u);
  EXPECT_EQ(moves, m.stage_activations + m.stage_deactivations);
}

}  // namespace
}  // namespace lcdc
