#include "lcdc/scenario.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "lcdc/hash.hpp"

namespace lcdc {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double to_double(const std::string& s, const std::string& key) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::uint32_t to_u32(const std::string& s, const std::string& key) {
  const auto v = to_u64(s, key);
  if (v > UINT32_MAX) throw std::invalid_argument(key + ": value too large");
  return static_cast<std::uint32_t>(v);
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + s + "'");
}

// Durations are written in the key's unit and stored in picoseconds.
SimTime to_time(const std::string& s, const std::string& key, double unit_ps) {
  const double v = to_double(s, key);
  if (v < 0) throw std::invalid_argument(key + ": must be >= 0");
  return SimTime::ps(static_cast<std::uint64_t>(std::llround(v * unit_ps)));
}

std::string fmt_time(SimTime t, double unit_ps) {
  return fmt_double(static_cast<double>(t.ticks()) / unit_ps);
}

constexpr double kNs = 1e3, kUs = 1e6, kMs = 1e9;

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

template <typename T>
Field u32_field(std::string sec, std::string key, T& ref) {
  const std::string name = sec + "." + key;
  return {sec, key, [&ref] { return std::to_string(ref); },
          [&ref, name](const std::string& v) { ref = static_cast<T>(to_u32(v, name)); }};
}

Field dbl_field(std::string sec, std::string key, double& ref) {
  const std::string name = sec + "." + key;
  return {sec, key, [&ref] { return fmt_double(ref); },
          [&ref, name](const std::string& v) { ref = to_double(v, name); }};
}

Field time_field(std::string sec, std::string key, SimTime& ref, double unit) {
  const std::string name = sec + "." + key;
  return {sec, key, [&ref, unit] { return fmt_time(ref, unit); },
          [&ref, name, unit](const std::string& v) { ref = to_time(v, name, unit); }};
}

Field str_field(std::string sec, std::string key, std::string& ref) {
  return {sec, key, [&ref] { return ref; }, [&ref](const std::string& v) { ref = v; }};
}

Field bool_field(std::string sec, std::string key, bool& ref) {
  const std::string name = sec + "." + key;
  return {sec, key, [&ref] { return std::string(ref ? "true" : "false"); },
          [&ref, name](const std::string& v) { ref = to_bool(v, name); }};
}

void add_tier(std::vector<Field>& f, const std::string& tier, TransceiverParams& p) {
  f.push_back(dbl_field("transceiver", tier + "_power_on_w", p.power_on_w));
  f.push_back(dbl_field("transceiver", tier + "_power_off_w", p.power_off_w));
  f.push_back(time_field("transceiver", tier + "_turn_on_ns", p.turn_on_delay, kNs));
  f.push_back(time_field("transceiver", tier + "_turn_off_ns", p.turn_off_delay, kNs));
}

std::vector<Field> fields(ScenarioConfig& c) {
  std::vector<Field> f;
  auto& s = c.site;
  f.push_back(u32_field("site", "clusters", s.clusters));
  f.push_back(u32_field("site", "rsw_per_cluster", s.rsw_per_cluster));
  f.push_back(u32_field("site", "csw_per_cluster", s.csw_per_cluster));
  f.push_back(u32_field("site", "fc_count", s.fc_count));
  f.push_back(u32_field("site", "servers_per_rack", s.servers_per_rack));
  f.push_back(u32_field("site", "csw_uplinks", s.csw_uplinks));
  f.push_back(dbl_field("site", "server_link_bps", s.server_link_bps));
  f.push_back(dbl_field("site", "rsw_uplink_bps", s.rsw_uplink_bps));
  f.push_back(dbl_field("site", "csw_uplink_bps", s.csw_uplink_bps));
  f.push_back(dbl_field("site", "ring_bps", s.ring_bps));
  f.push_back(u32_field("site", "csw_ring_links", s.csw_ring_links));
  f.push_back(u32_field("site", "fc_ring_links", s.fc_ring_links));
  f.push_back(dbl_field("site", "server_rsw_m", s.server_rsw_m));
  f.push_back(dbl_field("site", "rsw_csw_m", s.rsw_csw_m));
  f.push_back(dbl_field("site", "csw_fc_m", s.csw_fc_m));
  f.push_back(dbl_field("site", "ring_m", s.ring_m));

  add_tier(f, "server", c.transceivers.server);
  add_tier(f, "rsw_csw", c.transceivers.rsw_csw);
  add_tier(f, "csw_fc", c.transceivers.csw_fc);
  add_tier(f, "ring", c.transceivers.ring);

  f.push_back(dbl_field("switch", "high_watermark", c.switches.watermarks.high));
  f.push_back(dbl_field("switch", "low_watermark", c.switches.watermarks.low));
  f.push_back(time_field("switch", "holddown_us", c.switches.holddown, kUs));
  f.push_back(u32_field("switch", "queue_capacity", c.switches.queue_capacity));
  f.push_back(u32_field("switch", "control_ttl", c.switches.control_ttl));
  f.push_back(bool_field("switch", "flow_control", c.switches.flow_control));

  f.push_back(time_field("server", "pipeline_ns", c.server.pipeline_latency, kNs));
  f.push_back(time_field("server", "nic_idle_timeout_us", c.server.nic_idle_timeout, kUs));
  f.push_back(u32_field("server", "mtu", c.server.mtu));
  f.push_back(bool_field("server", "gate_nic", c.server.gate_nic));

  auto& w = c.workload;
  f.push_back(str_field("workload", "profile", w.profile));
  f.push_back(dbl_field("workload", "load", w.load));
  f.push_back({"workload", "locality",
               [&w] {
                 if (!w.locality) return std::string("default");
                 return fmt_double(w.locality->intra_rack) + " " + fmt_double(w.locality->intra_cluster) +
                        " " + fmt_double(w.locality->inter_cluster);
               },
               [&w](const std::string& v) {
                 if (v == "default") {
                   w.locality.reset();
                   return;
                 }
                 std::istringstream ss(v);
                 std::string a, b, d, extra;
                 if (!(ss >> a >> b >> d) || (ss >> extra)) {
                   throw std::invalid_argument(
                       "workload.locality: expected 'default' or three fractions (rack cluster inter)");
                 }
                 w.locality = LocalityMix{to_double(a, "workload.locality"), to_double(b, "workload.locality"),
                                          to_double(d, "workload.locality")};
               }});
  f.push_back(str_field("workload", "trace", w.trace));
  f.push_back(str_field("workload", "data_dir", w.data_dir));

  auto& r = c.run;
  f.push_back({"run", "mode", [&r] { return std::string(to_string(r.mode)); },
               [&r](const std::string& v) { r.mode = parse_mode(v); }});
  f.push_back({"run", "seed", [&r] { return std::to_string(r.seed); },
               [&r](const std::string& v) { r.seed = to_u64(v, "run.seed"); }});
  f.push_back(time_field("run", "duration_ms", r.duration, kMs));
  f.push_back(str_field("run", "output_dir", r.output_dir));
  f.push_back(bool_field("run", "exact_latency", r.exact_latency));
  f.push_back(bool_field("run", "connectivity_probe", r.connectivity_probe));
  f.push_back(u32_field("run", "histogram_buckets", r.histogram_buckets));
  return f;
}

Field* find_field(std::vector<Field>& fs, const std::string& section, const std::string& key) {
  auto it = std::find_if(fs.begin(), fs.end(),
                         [&](const Field& f) { return f.section == section && f.key == key; });
  return it == fs.end() ? nullptr : &*it;
}

}  // namespace

const char* to_string(ModeSelection m) {
  switch (m) {
    case ModeSelection::kGated: return "gated";
    case ModeSelection::kAlwaysOn: return "always-on";
    case ModeSelection::kBoth: return "both";
  }
  return "?";
}

ModeSelection parse_mode(const std::string& text) {
  if (text == "gated") return ModeSelection::kGated;
  if (text == "always-on") return ModeSelection::kAlwaysOn;
  if (text == "both") return ModeSelection::kBoth;
  throw std::invalid_argument("run.mode: expected gated, always-on or both, got '" + text + "'");
}

const TransceiverParams& TierTransceivers::for_tier(LinkTier t) const {
  switch (t) {
    case LinkTier::kServerRsw: return server;
    case LinkTier::kRswCsw: return rsw_csw;
    case LinkTier::kCswFc: return csw_fc;
    case LinkTier::kCswRing:
    case LinkTier::kFcRing: return ring;
  }
  return server;
}

SiteConfig site_preset(const std::string& name) {
  if (name == "full") return SiteConfig::full();
  if (name == "desk") return SiteConfig::desk();
  if (name == "tiny") return SiteConfig::tiny();
  throw std::invalid_argument("unknown site scale '" + name + "' (expected full, desk or tiny)");
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("LCDC_DATA_DIR"); env && *env) return env;
  std::error_code ec;
  if (std::filesystem::is_directory(LCDC_SOURCE_DATA_DIR, ec)) return LCDC_SOURCE_DATA_DIR;
  return LCDC_INSTALL_DATA_DIR;
}

void ScenarioConfig::validate() const {
  site.validate();
  for (const auto* p : {&transceivers.server, &transceivers.rsw_csw, &transceivers.csw_fc, &transceivers.ring}) {
    p->validate();
  }
  switches.watermarks.validate();
  if (switches.queue_capacity == 0) throw std::invalid_argument("switch.queue_capacity must be > 0");
  if (switches.control_ttl == 0) throw std::invalid_argument("switch.control_ttl must be > 0");
  server.validate();
  if (workload.trace.empty()) {
    const auto& names = builtin_profiles();
    if (std::find(names.begin(), names.end(), workload.profile) == names.end()) {
      throw std::invalid_argument("workload.profile: unknown profile '" + workload.profile + "'");
    }
  }
  if (!(workload.load > 0.0 && workload.load <= 1.0)) {
    throw std::invalid_argument("workload.load must lie in (0,1]");
  }
  if (workload.locality) workload.locality->validate();
  if (run.histogram_buckets == 0) throw std::invalid_argument("run.histogram_buckets must be > 0");
}

ScenarioConfig ScenarioConfig::parse(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ScenarioConfig cfg;
  auto fs = fields(cfg);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw std::invalid_argument(origin + ": key '" + section + "' outside a section");
    }
    for (const auto& [key, node] : body) {
      Field* f = find_field(fs, section, key);
      if (!f) throw std::invalid_argument(origin + ": unknown key '" + section + "." + key + "'");
      f->set(node.data());
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void ScenarioConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw std::invalid_argument("override '" + assignment + "': expected section.key=value");
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  auto fs = fields(*this);
  Field* f = find_field(fs, section, key);
  if (!f) throw std::invalid_argument("override: unknown key '" + section + "." + key + "'");
  f->set(assignment.substr(eq + 1));
}

std::string ScenarioConfig::serialize() const {
  auto copy = *this;
  auto fs = fields(copy);
  std::ostringstream out;
  std::string section;
  for (const auto& f : fs) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get() << '\n';
  }
  return out.str();
}

std::uint64_t ScenarioConfig::digest() const {
  auto copy = *this;
  copy.run.mode = ModeSelection::kBoth;
  copy.run.output_dir.clear();
  return fnv1a(copy.serialize());
}

}  // namespace lcdc
