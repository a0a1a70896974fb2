#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace lcdc::power {

/// Component counts and unit wattages for one network design.
struct ComponentInventory {
  std::string name;
  double servers = 0;
  double server_peak_w = 300.0;
  double switches = 0;
  double ports_per_switch = 0;
  double phy_ports = 0;  // one PHY chip per switch port
  double sfp_plus = 0;   // transceiver count, both link ends
  double qsfp = 0;
  double phy_w = 0.8;
  double switch_asic_w = 28.0;
  double nic_w = 10.0;  // per server
  double sfp_plus_w = 1.0;
  double qsfp_w = 2.4;

  // Throws std::invalid_argument for negative counts or non-positive wattages.
  void validate() const;
  static ComponentInventory load(const std::filesystem::path& path);
};

/// Piecewise-linear utilization -> fraction-of-peak curve.
class ServerPowerCurve {
 public:
  ServerPowerCurve(std::string name, std::vector<std::array<double, 2>> points);

  // Line through (0.3, at_30) and (1, 1), extended down to zero utilization.
  static ServerPowerCurve anchored(std::string name, double at_30);
  static ServerPowerCurve server_2013() { return anchored("2013-server", 0.70); }
  static ServerPowerCurve sr665() { return anchored("sr665", 0.58); }
  static ServerPowerCurve energy_proportional() { return anchored("energy-proportional", 0.40); }
  static ServerPowerCurve peak();
  // Accepts the preset names above plus "peak".
  static ServerPowerCurve preset(const std::string& name);

  double operator()(double utilization) const;
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::vector<std::array<double, 2>> points_;
};

enum class FactorTarget { kServer, kElectronics, kBoth };

struct LadderStep {
  std::string name;
  FactorTarget target = FactorTarget::kServer;
  double factor = 1.0;
};

/// Cumulative optimization ladder. Server factors scale server power;
/// electronics factors scale switch ASIC, NIC and PHY power.
struct OptimizationScenario {
  std::vector<LadderStep> steps;

  void validate() const;
  double server_factor() const;
  double electronics_factor() const;
  // The first `n` steps only.
  OptimizationScenario prefix(std::size_t n) const;
};

enum Component : std::size_t { kServers, kSwitchAsic, kNic, kSwitchPhy, kTransceivers, kComponentCount };

const char* component_name(std::size_t c);

struct Breakdown {
  std::array<double, kComponentCount> watts{};

  double total() const;
  std::array<double, kComponentCount> shares() const;
  double share(Component c) const { return shares()[c]; }
  // PHY and NIC electronics, the additional savings pool.
  double phy_nic_share() const { return share(kSwitchPhy) + share(kNic); }
};

Breakdown breakdown(const ComponentInventory& inv, const ServerPowerCurve& curve, double utilization,
                    const OptimizationScenario& scenario);

// Per-design shares averaged with equal weight.
std::array<double, kComponentCount> mean_shares(const std::vector<ComponentInventory>& designs,
                                                const ServerPowerCurve& curve, double utilization,
                                                const OptimizationScenario& scenario);

// eligible_share x network_savings, eligible_share = transceiver_share plus
// phy_nic_share when include_phy_nic is set.
double overall_savings(double transceiver_share, double network_savings, bool include_phy_nic,
                       double phy_nic_share = 0.0);

// Transceiver share of one switch's power: ports x per-port watts over the
// switch's own draw plus those transceivers.
double switch_transceiver_fraction(double ports, double transceiver_w, double switch_w);

struct PowerScenario {
  std::string curve = "energy-proportional";
  double network_savings = 0.60;
  std::vector<double> utilizations{0.3, 0.5, 0.7};
  std::vector<ComponentInventory> designs;
  OptimizationScenario ladder;

  void validate() const;
  // Design files are resolved relative to the scenario file.
  static PowerScenario load(const std::filesystem::path& path);
};

struct SavingsRow {
  double utilization = 0;
  std::array<double, kComponentCount> shares{};
  double transceiver_share = 0;
  double phy_nic_share = 0;
  double savings_transceivers = 0;
  double savings_with_phy_nic = 0;
};

std::vector<SavingsRow> savings_table(const PowerScenario& scenario);

struct LadderBar {
  std::string label;
  std::array<double, kComponentCount> shares{};
};

// Stacked-bar shares at `utilization`: the 2013 server, the sr665 server, an
// energy-proportional server, then each ladder step applied cumulatively.
std::vector<LadderBar> ladder_bars(const PowerScenario& scenario, double utilization);

std::string savings_csv(const std::vector<SavingsRow>& rows);
std::string ladder_csv(const std::vector<LadderBar>& bars);

}  // namespace lcdc::power
