#include "lcdc/power_model.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lcdc::power {

namespace pt = boost::property_tree;

namespace {

pt::ptree read_ini(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::runtime_error(e.what());
  }
  return tree;
}

void reject_unknown(const pt::ptree& tree, const std::string& section,
                    const std::set<std::string>& known, const std::filesystem::path& path) {
  for (const auto& [key, _] : tree) {
    if (!known.count(key)) {
      throw std::invalid_argument(path.string() + ": unknown key '" + section + "." + key + "'");
    }
  }
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not a number '" + text + "'");
  }
  if (text.find_first_not_of(" \t", used) != std::string::npos) {
    throw std::invalid_argument(what + ": not a number '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(std::string text) {
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream ss(text);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

void ComponentInventory::validate() const {
  for (double c : {servers, switches, ports_per_switch, phy_ports, sfp_plus, qsfp}) {
    if (!(c >= 0.0)) throw std::invalid_argument("inventory " + name + ": counts must be >= 0");
  }
  for (double w : {server_peak_w, phy_w, switch_asic_w, nic_w, sfp_plus_w, qsfp_w}) {
    if (!(w > 0.0)) throw std::invalid_argument("inventory " + name + ": wattages must be > 0");
  }
}

ComponentInventory ComponentInventory::load(const std::filesystem::path& path) {
  const auto tree = read_ini(path);
  reject_unknown(tree, "", {"inventory"}, path);
  const auto& sec = tree.get_child("inventory");
  struct Field {
    const char* key;
    double ComponentInventory::*member;
  };
  static const Field fields[] = {
      {"servers", &ComponentInventory::servers},
      {"server_peak_w", &ComponentInventory::server_peak_w},
      {"switches", &ComponentInventory::switches},
      {"ports_per_switch", &ComponentInventory::ports_per_switch},
      {"phy_ports", &ComponentInventory::phy_ports},
      {"sfp_plus", &ComponentInventory::sfp_plus},
      {"qsfp", &ComponentInventory::qsfp},
      {"phy_w", &ComponentInventory::phy_w},
      {"switch_asic_w", &ComponentInventory::switch_asic_w},
      {"nic_w", &ComponentInventory::nic_w},
      {"sfp_plus_w", &ComponentInventory::sfp_plus_w},
      {"qsfp_w", &ComponentInventory::qsfp_w},
  };
  std::set<std::string> known{"name"};
  for (const auto& f : fields) known.insert(f.key);
  reject_unknown(sec, "inventory", known, path);
  ComponentInventory inv;
  inv.name = sec.get<std::string>("name", path.stem().string());
  for (const auto& f : fields) {
    if (auto v = sec.get_optional<std::string>(f.key)) {
      inv.*(f.member) = parse_number(*v, path.string() + ": inventory." + f.key);
    }
  }
  inv.validate();
  return inv;
}

ServerPowerCurve::ServerPowerCurve(std::string name, std::vector<std::array<double, 2>> points)
    : name_(std::move(name)), points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("power curve " + name_ + ": no points");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i][0] <= points_[i - 1][0] || points_[i][1] < points_[i - 1][1]) {
      throw std::invalid_argument("power curve " + name_ + ": must be increasing in utilization and monotone");
    }
  }
  if (std::abs((*this)(1.0) - 1.0) > 1e-12) {
    throw std::invalid_argument("power curve " + name_ + ": must reach 1 at full utilization");
  }
}

ServerPowerCurve ServerPowerCurve::anchored(std::string name, double at_30) {
  const double slope = (1.0 - at_30) / 0.7;
  return ServerPowerCurve(std::move(name), {{0.0, at_30 - 0.3 * slope}, {0.3, at_30}, {1.0, 1.0}});
}

ServerPowerCurve ServerPowerCurve::peak() { return ServerPowerCurve("peak", {{0.0, 1.0}, {1.0, 1.0}}); }

ServerPowerCurve ServerPowerCurve::preset(const std::string& name) {
  if (name == "2013-server") return server_2013();
  if (name == "sr665") return sr665();
  if (name == "energy-proportional") return energy_proportional();
  if (name == "peak") return peak();
  throw std::invalid_argument("unknown server power curve '" + name + "'");
}

double ServerPowerCurve::operator()(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (u <= points_.front()[0]) return points_.front()[1];
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (u <= points_[i][0]) {
      const auto& a = points_[i - 1];
      const auto& b = points_[i];
      return a[1] + (u - a[0]) / (b[0] - a[0]) * (b[1] - a[1]);
    }
  }
  return points_.back()[1];
}

void OptimizationScenario::validate() const {
  for (const auto& s : steps) {
    if (!(s.factor > 0.0 && s.factor <= 1.0)) {
      throw std::invalid_argument("ladder step " + s.name + ": factor must lie in (0,1]");
    }
  }
}

double OptimizationScenario::server_factor() const {
  double f = 1.0;
  for (const auto& s : steps) {
    if (s.target != FactorTarget::kElectronics) f *= s.factor;
  }
  return f;
}

double OptimizationScenario::electronics_factor() const {
  double f = 1.0;
  for (const auto& s : steps) {
    if (s.target != FactorTarget::kServer) f *= s.factor;
  }
  return f;
}

OptimizationScenario OptimizationScenario::prefix(std::size_t n) const {
  OptimizationScenario out;
  out.steps.assign(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(std::min(n, steps.size())));
  return out;
}

const char* component_name(std::size_t c) {
  static const char* names[] = {"servers", "switch_asic", "nic", "switch_phy", "transceivers"};
  return c < kComponentCount ? names[c] : "?";
}

double Breakdown::total() const {
  double t = 0;
  for (double w : watts) t += w;
  return t;
}

std::array<double, kComponentCount> Breakdown::shares() const {
  std::array<double, kComponentCount> s{};
  const double t = total();
  if (t <= 0) return s;
  for (std::size_t i = 0; i < kComponentCount; ++i) s[i] = watts[i] / t;
  return s;
}

Breakdown breakdown(const ComponentInventory& inv, const ServerPowerCurve& curve, double utilization,
                    const OptimizationScenario& scenario) {
  inv.validate();
  scenario.validate();
  const double e = scenario.electronics_factor();
  Breakdown b;
  b.watts[kServers] = inv.servers * inv.server_peak_w * curve(utilization) * scenario.server_factor();
  b.watts[kSwitchAsic] = inv.switches * inv.switch_asic_w * e;
  b.watts[kNic] = inv.servers * inv.nic_w * e;
  b.watts[kSwitchPhy] = inv.phy_ports * inv.phy_w * e;
  b.watts[kTransceivers] = inv.sfp_plus * inv.sfp_plus_w + inv.qsfp * inv.qsfp_w;
  return b;
}

std::array<double, kComponentCount> mean_shares(const std::vector<ComponentInventory>& designs,
                                                const ServerPowerCurve& curve, double utilization,
                                                const OptimizationScenario& scenario) {
  if (designs.empty()) throw std::invalid_argument("mean_shares: no designs");
  std::array<double, kComponentCount> acc{};
  for (const auto& d : designs) {
    const auto s = breakdown(d, curve, utilization, scenario).shares();
    for (std::size_t i = 0; i < kComponentCount; ++i) acc[i] += s[i];
  }
  for (double& v : acc) v /= static_cast<double>(designs.size());
  return acc;
}

double overall_savings(double transceiver_share, double network_savings, bool include_phy_nic,
                       double phy_nic_share) {
  const double eligible = transceiver_share + (include_phy_nic ? phy_nic_share : 0.0);
  return eligible * network_savings;
}

double switch_transceiver_fraction(double ports, double transceiver_w, double switch_w) {
  const double tx = ports * transceiver_w;
  return tx / (switch_w + tx);
}

void PowerScenario::validate() const {
  ServerPowerCurve::preset(curve);
  if (!(network_savings >= 0.0 && network_savings <= 1.0)) {
    throw std::invalid_argument("scenario.network_savings must lie in [0,1]");
  }
  for (double u : utilizations) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("scenario.utilizations must lie in [0,1]");
  }
  if (designs.empty()) throw std::invalid_argument("scenario.designs is empty");
  for (const auto& d : designs) d.validate();
  ladder.validate();
}

PowerScenario PowerScenario::load(const std::filesystem::path& path) {
  const auto tree = read_ini(path);
  reject_unknown(tree, "", {"scenario", "ladder"}, path);
  PowerScenario sc;
  if (auto sec = tree.get_child_optional("scenario")) {
    reject_unknown(*sec, "scenario", {"curve", "network_savings", "utilizations", "designs"}, path);
    sc.curve = sec->get<std::string>("curve", sc.curve);
    if (auto v = sec->get_optional<std::string>("network_savings")) {
      sc.network_savings = parse_number(*v, "scenario.network_savings");
    }
    if (auto v = sec->get_optional<std::string>("utilizations")) {
      sc.utilizations.clear();
      for (const auto& tok : split_list(*v)) sc.utilizations.push_back(parse_number(tok, "scenario.utilizations"));
    }
    if (auto v = sec->get_optional<std::string>("designs")) {
      for (const auto& tok : split_list(*v)) {
        sc.designs.push_back(ComponentInventory::load(path.parent_path() / tok));
      }
    }
  }
  if (auto sec = tree.get_child_optional("ladder")) {
    for (const auto& [key, node] : *sec) {
      const auto parts = split_list(node.data());
      if (parts.size() != 2) {
        throw std::invalid_argument("ladder." + key + ": expected '<server|electronics|both> <factor>'");
      }
      LadderStep step;
      step.name = key;
      if (parts[0] == "server") {
        step.target = FactorTarget::kServer;
      } else if (parts[0] == "electronics") {
        step.target = FactorTarget::kElectronics;
      } else if (parts[0] == "both") {
        step.target = FactorTarget::kBoth;
      } else {
        throw std::invalid_argument("ladder." + key + ": unknown target '" + parts[0] + "'");
      }
      step.factor = parse_number(parts[1], "ladder." + key);
      sc.ladder.steps.push_back(step);
    }
  }
  sc.validate();
  return sc;
}

std::vector<SavingsRow> savings_table(const PowerScenario& scenario) {
  scenario.validate();
  const auto curve = ServerPowerCurve::preset(scenario.curve);
  std::vector<SavingsRow> rows;
  for (double u : scenario.utilizations) {
    SavingsRow r;
    r.utilization = u;
    r.shares = mean_shares(scenario.designs, curve, u, scenario.ladder);
    r.transceiver_share = r.shares[kTransceivers];
    r.phy_nic_share = r.shares[kSwitchPhy] + r.shares[kNic];
    r.savings_transceivers = overall_savings(r.transceiver_share, scenario.network_savings, false);
    r.savings_with_phy_nic =
        overall_savings(r.transceiver_share, scenario.network_savings, true, r.phy_nic_share);
    rows.push_back(r);
  }
  return rows;
}

std::vector<LadderBar> ladder_bars(const PowerScenario& scenario, double utilization) {
  scenario.validate();
  std::vector<LadderBar> bars;
  const OptimizationScenario none;
  for (const auto& curve : {ServerPowerCurve::server_2013(), ServerPowerCurve::sr665(),
                            ServerPowerCurve::energy_proportional()}) {
    bars.push_back({curve.name(), mean_shares(scenario.designs, curve, utilization, none)});
  }
  const auto ep = ServerPowerCurve::energy_proportional();
  for (std::size_t i = 1; i <= scenario.ladder.steps.size(); ++i) {
    bars.push_back({"+" + scenario.ladder.steps[i - 1].name,
                    mean_shares(scenario.designs, ep, utilization, scenario.ladder.prefix(i))});
  }
  return bars;
}

std::string savings_csv(const std::vector<SavingsRow>& rows) {
  std::ostringstream out;
  out << "utilization";
  for (std::size_t c = 0; c < kComponentCount; ++c) out << ",share_" << component_name(c);
  out << ",savings_transceivers,savings_with_phy_nic\n";
  out.precision(6);
  for (const auto& r : rows) {
    out << r.utilization;
    for (double s : r.shares) out << ',' << s;
    out << ',' << r.savings_transceivers << ',' << r.savings_with_phy_nic << '\n';
  }
  return out.str();
}

std::string ladder_csv(const std::vector<LadderBar>& bars) {
  std::ostringstream out;
  out << "bar";
  for (std::size_t c = 0; c < kComponentCount; ++c) out << ',' << component_name(c);
  out << '\n';
  out.precision(6);
  for (const auto& b : bars) {
    out << b.label;
    for (double s : b.shares) out << ',' << s;
    out << '\n';
  }
  return out.str();
}

}  // namespace lcdc::power
