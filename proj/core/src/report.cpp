#include "lcdc/report.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace lcdc {

namespace {

using nlohmann::json;

json opt_us(const std::optional<double>& ps) {
  return ps ? json(*ps * 1e-6) : json(nullptr);
}

json latency_json(const LatencyStats& s) {
  return json{{"count", s.count()},
              {"mean_us", opt_us(s.mean_ps())},
              {"p50_us", opt_us(s.percentile_ps(0.50))},
              {"p95_us", opt_us(s.percentile_ps(0.95))},
              {"p99_us", opt_us(s.percentile_ps(0.99))},
              {"max_us", opt_us(s.max_ps())}};
}

json run_json(const RunMetrics& m) {
  json j;
  j["mode"] = to_string(m.mode);
  j["trace_hash"] = hex64(m.trace_hash);
  j["events"] = m.events;
  j["flows"] = {{"injected", m.flows_injected}, {"completed", m.flows_completed}};
  j["packets"] = {{"injected", m.packets_injected},
                  {"delivered", m.packets_delivered},
                  {"in_flight", m.packets_in_flight}};
  j["drops"] = {{"buffer", m.drops.buffer},
                {"gating", m.drops.gating},
                {"lookup", m.drops.lookup},
                {"control_unknown", m.drops.control_unknown}};
  j["control"] = {{"frames_sent", m.control_frames_sent}, {"max_hops", m.control_max_hops}};
  j["stages"] = {{"activations", m.stage_activations}, {"deactivations", m.stage_deactivations}};
  j["connectivity"] = {{"probes", m.connectivity_probes}, {"failures", m.connectivity_failures}};
  j["latency"] = {{"packet", latency_json(m.packet_latency)}, {"network", latency_json(m.network_latency)}};
  j["energy"] = {{"headline_j", m.headline_energy_j}, {"total_j", m.total_energy_j}};
  if (m.timeline && m.timeline->finished()) {
    j["activation"] = {{"gated_uplinks", m.timeline->size()},
                       {"mean_on_fraction", m.timeline->mean_on_fraction()},
                       {"links_off_half_the_time", m.timeline->fraction_of_links_off_at_least(0.5)},
                       {"histogram", m.timeline->histogram()}};
  }
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + p.string());
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string summary_json(const ScenarioConfig& config, const RunMetrics* gated,
                         const RunMetrics* baseline, const std::optional<SavingsReport>& savings) {
  json j;
  j["schema"] = "lcdc-summary/1";
  j["config_digest"] = hex64(config.digest());
  j["seed"] = config.run.seed;
  j["duration_s"] = config.run.duration.seconds();
  j["workload"] = config.workload.trace.empty() ? config.workload.profile : "trace:" + config.workload.trace;
  j["load"] = config.workload.load;
  j["runs"] = json::object();
  if (gated) j["runs"]["gated"] = run_json(*gated);
  if (baseline) j["runs"]["always-on"] = run_json(*baseline);
  if (savings) {
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j["savings"] = {{"transceiver_savings", savings->transceiver_savings},
                    {"all_transceiver_savings", savings->all_transceiver_savings},
                    {"latency_overhead", opt(savings->latency_overhead)},
                    {"network_latency_overhead", opt(savings->network_latency_overhead)},
                    {"links_off_half_the_time", opt(savings->links_mostly_off)},
                    {"activation_histogram", savings->activation_histogram}};
  }
  return j.dump(2) + "\n";
}

std::string timeline_csv(const ActivationTimeline& timeline) {
  std::ostringstream out;
  out.precision(12);
  out << "link_id,begin_us,end_us,state\n";
  for (std::uint32_t i = 0; i < timeline.size(); ++i) {
    for (const auto& iv : timeline.intervals(i)) {
      if (iv.end == iv.begin) continue;
      out << timeline.link_id(i) << ',' << iv.begin.micros() << ',' << iv.end.micros() << ','
          << (iv.on ? "on" : "off") << '\n';
    }
  }
  return out.str();
}

std::string histogram_csv(const ActivationTimeline& timeline) {
  std::ostringstream out;
  out << "bucket_low,bucket_high,time_fraction\n";
  const auto& h = timeline.histogram();
  const double b = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    out << static_cast<double>(i) / b << ',' << static_cast<double>(i + 1) / b << ',' << h[i] << '\n';
  }
  return out.str();
}

std::string ledger_csv(const std::vector<LedgerEntry>& ledger) {
  std::ostringstream out;
  out.precision(17);
  out << "link_id,node_id,headline,energy_j\n";
  for (const auto& e : ledger) {
    out << e.link_id << ',' << e.node_id << ',' << (e.headline ? 1 : 0) << ',' << e.energy_j << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir,
                                                 const ScenarioConfig& config,
                                                 const RunMetrics* gated, const RunMetrics* baseline,
                                                 const std::optional<SavingsReport>& savings) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto put = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(dir / name);
  };
  put("summary.json", summary_json(config, gated, baseline, savings));
  put("effective.cfg", config.serialize());
  for (const RunMetrics* m : {gated, baseline}) {
    if (!m) continue;
    const std::string tag = to_string(m->mode);
    if (m->timeline && m->timeline->finished()) {
      put("timeline_" + tag + ".csv", timeline_csv(*m->timeline));
      put("activation_" + tag + ".csv", histogram_csv(*m->timeline));
    }
    put("ledger_" + tag + ".csv", ledger_csv(m->ledger));
  }
  return written;
}

}  // namespace lcdc
