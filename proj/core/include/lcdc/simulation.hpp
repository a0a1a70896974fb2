#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "lcdc/metrics.hpp"
#include "lcdc/scenario.hpp"
#include "lcdc/topology.hpp"
#include "lcdc/traffic.hpp"

namespace lcdc {

/// Observation points for tests and tools.
struct SimulationHooks {
  // A switch's usable uplink set changed; `active_stage` after the change.
  std::function<void(SimTime, NodeId sw, std::uint32_t active_stage)> on_stage_change;
  // Result of each connectivity probe.
  std::function<void(SimTime, bool connected)> on_probe;
};

/// Packet-level model of the site: server NICs with gated lasers, CIOQ
/// switches with stage-indexed uplinks, in-band control frames.
class Simulation {
 public:
  Simulation(const ScenarioConfig& config, RunMode mode, std::vector<FlowSpec> flows,
             SimulationHooks hooks = {});
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Runs to the configured duration. Call once.
  RunMetrics run();

  const Topology& topology() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Flows for the configured workload: sampled from the profile at the target
// load, or replayed from the trace file.
std::vector<FlowSpec> build_workload(const ScenarioConfig& config, const Topology& topo);

RunMetrics run_scenario(const ScenarioConfig& config, RunMode mode, SimulationHooks hooks = {});

}  // namespace lcdc
