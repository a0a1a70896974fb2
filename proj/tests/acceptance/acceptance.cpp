// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "lcdc/control_frame.hpp"
#include "lcdc/power_model.hpp"
#include "lcdc/simulation.hpp"
#include "lcdc/stage_controller.hpp"
#include "lcdc/switch_dataplane.hpp"
#include "lcdc/traffic.hpp"

namespace {

using namespace lcdc;

// Pinned tolerances.
constexpr double kMinSavings = 0.45;
constexpr double kMaxLatencyOverhead = 0.12;
constexpr double kMinLinksOffShare = 0.50;
constexpr int kMinWorkloadsMostlyOff = 3;
constexpr double kMinFidelity = 0.99;
constexpr double kPowerTolerance = 0.01;
constexpr std::size_t kFidelitySamples = 100'000;
constexpr int kCodecFrames = 100'000;
constexpr int kSeeds = 5;
const std::vector<std::string> kWorkloads{"fb-web", "fb-cache", "fb-hadoop", "ms-dc"};
const std::vector<std::string> kBursty{"fb-web", "fb-cache"};
const std::vector<double> kLoads{0.10, 0.30, 0.50};

struct Verdict {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------------ runs

struct RunKey {
  std::string profile;
  double load;
  std::uint64_t seed;
  RunMode mode;
  bool gate_nic;
  auto operator<=>(const RunKey&) const = default;
};

struct RunRecord {
  RunMetrics metrics;
  bool replay_ok = false;
  std::uint64_t probes_seen = 0;
  std::uint64_t probe_failures_seen = 0;
  std::uint64_t transitions_seen = 0;
};

class RunCache {
 public:
  const RunRecord& get(const RunKey& k) {
    auto it = runs_.find(k);
    if (it != runs_.end()) return it->second;
    return runs_.emplace(k, execute(k)).first->second;
  }
  const std::map<RunKey, RunRecord>& all() const { return runs_; }

 private:
  static ScenarioConfig config_for(const RunKey& k) {
    ScenarioConfig c;
    c.site = SiteConfig::desk();
    c.workload.profile = k.profile;
    c.workload.load = k.load;
    c.workload.data_dir = LCDC_DATA_DIR;
    c.run.seed = k.seed;
    c.run.duration = SimTime::ms(10);
    c.server.gate_nic = k.gate_nic;
    return c;
  }

  static RunRecord execute(const RunKey& k) {
    const ScenarioConfig c = config_for(k);
    RunRecord r;
    std::map<NodeId, std::uint32_t> stage;
    SimulationHooks hooks;
    hooks.on_probe = [&](SimTime, bool ok) {
      ++r.probes_seen;
      if (!ok) ++r.probe_failures_seen;
    };
    hooks.on_stage_change = [&](SimTime, NodeId sw, std::uint32_t active) {
      auto [it, fresh] = stage.try_emplace(sw, 1);
      if (it->second != active) ++r.transitions_seen;
      it->second = active;
    };
    r.metrics = run_scenario(c, k.mode, hooks);
    r.replay_ok = run_scenario(c, k.mode).trace_hash == r.metrics.trace_hash;
    return r;
  }

  std::map<RunKey, RunRecord> runs_;
};

RunKey gated(const std::string& p, double load, std::uint64_t seed = 1, bool gate_nic = true) {
  return {p, load, seed, RunMode::kGated, gate_nic};
}
RunKey baseline(const std::string& p, double load, std::uint64_t seed = 1) {
  return {p, load, seed, RunMode::kAlwaysOn, true};
}

// ------------------------------------------------------------ criteria

Verdict never_sever(RunCache& cache) {
  std::uint64_t probes = 0, failures = 0, transitions = 0;
  bool covered = true;
  for (const auto& p : kWorkloads) {
    const auto& r = cache.get(gated(p, 0.30));
    probes += r.probes_seen;
    failures += r.probe_failures_seen + r.metrics.connectivity_failures;
    transitions += r.transitions_seen;
    covered = covered && r.probes_seen >= r.transitions_seen && r.transitions_seen > 0;
  }
  return {1, "never_sever_connectivity", failures == 0 && covered,
          fmt("%llu probes over %llu stage transitions, %llu failures", (unsigned long long)probes,
              (unsigned long long)transitions, (unsigned long long)failures)};
}

Verdict zero_gating_loss(RunCache& cache) {
  std::uint64_t gating = 0, buffer = 0;
  for (const auto& [k, r] : cache.all()) {
    gating += r.metrics.drops.gating;
    buffer += r.metrics.drops.buffer;
  }
  return {2, "zero_gating_loss", gating == 0,
          fmt("%zu runs, gating drops %llu, buffer drops %llu (separate)", cache.all().size(),
              (unsigned long long)gating, (unsigned long long)buffer)};
}

Verdict node_zero_penalty(RunCache& cache) {
  int identical = 0;
  std::size_t flows = 0;
  for (const auto& p : kWorkloads) {
    const auto& on = cache.get(gated(p, 0.30, 1, false)).metrics;
    const auto& off = cache.get(gated(p, 0.30, 1, true)).metrics;
    flows += on.flow_completion.size();
    identical += on.flow_completion == off.flow_completion && on.flows_completed == off.flows_completed;
  }
  return {3, "node_zero_penalty", identical == static_cast<int>(kWorkloads.size()),
          fmt("%d/%zu workloads with identical per-flow completion times (%zu flows)", identical,
              kWorkloads.size(), flows)};
}

std::vector<std::uint8_t> read_hex(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::uint8_t> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) out.push_back(static_cast<std::uint8_t>(std::stoul(tok, nullptr, 16)));
  }
  return out;
}

Verdict codec() {
  std::mt19937_64 rng(2024);
  int round_trip = 0, sized = 0;
  for (int i = 0; i < kCodecFrames; ++i) {
    LcdcControlFrame f;
    f.dst_mac = mac_from_u64(rng() & 0xFFFFFFFFFFFFULL);
    f.src_mac = mac_from_u64(rng() & 0xFFFFFFFFFFFFULL);
    f.sender_id = static_cast<std::uint32_t>(rng());
    f.stage_id = LcdcControlFrame::pack_stage_id(static_cast<ControlOpcode>(rng() % 4),
                                                 static_cast<std::uint16_t>(rng() % (kMaxStageNumber + 1)));
    f.ttl = static_cast<std::uint16_t>(rng());
    const auto bytes = encode_control(f);
    const auto back = decode_control(bytes);
    round_trip += back.status == DecodeStatus::kOk && back.frame == f;
    sized += bytes.size() == 64 && bytes[12] == 0x91 && bytes[13] == 0x00;
  }
  LcdcControlFrame g;
  g.sender_id = 0x0A;
  g.stage_id = LcdcControlFrame::pack_stage_id(ControlOpcode::kEnable, 2);
  g.ttl = 3;
  const auto golden = read_hex(std::filesystem::path(LCDC_TEST_DATA_DIR) / "control_enable_stage2.hex");
  const auto enc = encode_control(g);
  const bool golden_ok = golden == std::vector<std::uint8_t>(enc.begin(), enc.end());
  return {4, "control_frame_codec", round_trip == kCodecFrames && sized == kCodecFrames && golden_ok,
          fmt("round-trip %d/%d, 64-byte with ethertype at 12-13 %d/%d, golden vector %s", round_trip,
              kCodecFrames, sized, kCodecFrames, golden_ok ? "match" : "MISMATCH")};
}

// Reference stage machine written from the watermark rules alone: integer
// percentages, one stage per step, transitions complete within the step.
struct ReferenceStages {
  std::uint32_t capacity, high_pct, low_pct, max_stage;
  std::uint64_t holddown;
  std::uint32_t stage = 1;
  std::uint64_t quiet_until = 0;

  StageTrigger step(std::uint64_t now, const std::vector<std::uint32_t>& depths) {
    bool up = false, down = true;
    for (std::uint32_t i = 0; i < stage; ++i) {
      up |= 100ULL * depths[i] > std::uint64_t{high_pct} * capacity;
      down &= 100ULL * depths[i] < std::uint64_t{low_pct} * capacity;
    }
    if (up && stage < max_stage) {
      ++stage;
      quiet_until = now + holddown;
      return StageTrigger::kStageUp;
    }
    if (down && stage > 1 && now >= quiet_until) {
      --stage;
      quiet_until = now + holddown;
      return StageTrigger::kStageDown;
    }
    return StageTrigger::kNone;
  }
};

struct InstantActions : StageActions {
  SimTime request_laser_on(std::uint32_t) override { return SimTime{}; }
  void request_laser_off(std::uint32_t) override {}
  void send_control(ControlOpcode, std::uint32_t) override {}
  bool uplink_drained(std::uint32_t) override { return true; }
  void stages_changed() override {}
};

// Drives the monitor and controller with one depth vector per microsecond.
std::vector<StageTrigger> run_model(std::uint32_t capacity, std::uint32_t max_stage, SimTime holddown,
                                    const std::vector<std::vector<std::uint32_t>>& trace) {
  const BacklogMonitor mon(capacity, Watermarks{0.75, 0.22});
  StageController ctl(max_stage, holddown);
  InstantActions act;
  std::vector<StageTrigger> out;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const SimTime now = SimTime::us(t);
    const std::uint32_t s = ctl.active_stage();
    const auto trig = mon.evaluate(std::span(trace[t].data(), s), s, max_stage, ctl.holddown_expired(now));
    if (trig == StageTrigger::kStageUp) {
      ctl.stage_up(now, act);
      ctl.on_laser_ready(s + 1, now, act);
      ctl.on_ack_enable(s + 1, now, act);
    } else if (trig == StageTrigger::kStageDown) {
      ctl.stage_down(now, act);
      ctl.on_ack_disable(s, now, act);
    }
    out.push_back(trig);
  }
  return out;
}

std::vector<StageTrigger> run_reference(std::uint32_t capacity, std::uint32_t max_stage, std::uint64_t holddown_us,
                                        const std::vector<std::vector<std::uint32_t>>& trace) {
  ReferenceStages ref{capacity, 75, 22, max_stage, holddown_us};
  std::vector<StageTrigger> out;
  for (std::size_t t = 0; t < trace.size(); ++t) out.push_back(ref.step(t, trace[t]));
  return out;
}

Verdict watermark_machine() {
  std::size_t traces = 0, mismatches = 0, steps = 0;
  // Exhaustive: every two-queue trace of length <= 4 over depths 0..4 (capacity 4).
  std::vector<std::vector<std::uint32_t>> trace;
  const std::function<void(std::size_t)> enumerate = [&](std::size_t len) {
    if (!trace.empty()) {
      for (std::uint64_t hd : {0, 2}) {
        ++traces;
        steps += trace.size();
        mismatches += run_model(4, 2, SimTime::us(hd), trace) != run_reference(4, 2, hd, trace);
      }
    }
    if (trace.size() == len) return;
    for (std::uint32_t a = 0; a <= 4; ++a) {
      for (std::uint32_t b = 0; b <= 4; ++b) {
        trace.push_back({a, b});
        enumerate(len);
        trace.pop_back();
      }
    }
  };
  enumerate(4);
  // Random traces up to 1000 steps with bursty depth walks.
  std::mt19937_64 rng(99);
  for (int n = 0; n < 3000; ++n) {
    const std::uint32_t capacity = std::vector<std::uint32_t>{1, 7, 100, 128, 1000}[rng() % 5];
    const std::uint32_t max_stage = 1 + static_cast<std::uint32_t>(rng() % 4);
    const std::uint64_t hd = rng() % 60;
    const std::size_t len = 1 + rng() % 1000;
    std::vector<std::vector<std::uint32_t>> t(len, std::vector<std::uint32_t>(max_stage));
    std::vector<std::int64_t> level(max_stage, 0);
    for (auto& row : t) {
      for (std::uint32_t q = 0; q < max_stage; ++q) {
        const auto jump = static_cast<std::int64_t>(rng() % (capacity / 4 + 2)) - static_cast<std::int64_t>(capacity / 8 + 1);
        level[q] = std::clamp<std::int64_t>(level[q] + jump, 0, capacity);
        if (rng() % 50 == 0) level[q] = static_cast<std::int64_t>(rng() % (capacity + 1));
        row[q] = static_cast<std::uint32_t>(level[q]);
      }
    }
    ++traces;
    steps += len;
    mismatches += run_model(capacity, max_stage, SimTime::us(hd), t) != run_reference(capacity, max_stage, hd, t);
  }
  return {5, "watermark_state_machine", mismatches == 0,
          fmt("%zu traces (%zu steps), %zu mismatching trigger sequences", traces, steps, mismatches)};
}

Verdict headline(RunCache& cache) {
  bool ok = true;
  std::string detail;
  for (const auto& p : kBursty) {
    std::vector<double> savings;
    double overhead_at_30 = 0;
    for (double load : kLoads) {
      double s = 0, o = 0;
      for (int seed = 1; seed <= kSeeds; ++seed) {
        const auto r = savings_report(cache.get(gated(p, load, seed)).metrics,
                                      cache.get(baseline(p, load, seed)).metrics);
        s += r.transceiver_savings;
        o += r.latency_overhead.value_or(INFINITY);
      }
      savings.push_back(s / kSeeds);
      if (load == 0.30) overhead_at_30 = o / kSeeds;
    }
    const double s30 = savings[1];
    const bool monotone = savings[0] > savings[1] && savings[1] > savings[2];
    ok = ok && s30 >= kMinSavings && overhead_at_30 <= kMaxLatencyOverhead && monotone;
    detail += fmt("%s: savings %.1f%% latency +%.1f%% at 30%%, savings 10/30/50%% = %.1f/%.1f/%.1f%%; ",
                  p.c_str(), s30 * 100, overhead_at_30 * 100, savings[0] * 100, savings[1] * 100,
                  savings[2] * 100);
  }
  detail.resize(detail.size() - 2);
  return {6, "headline_savings_and_latency", ok, detail};
}

Verdict activation_time(RunCache& cache) {
  int passing = 0;
  std::string detail;
  for (const auto& p : kWorkloads) {
    const auto& m = cache.get(gated(p, 0.30)).metrics;
    const double share = m.timeline ? m.timeline->fraction_of_links_off_at_least(0.5) : 0.0;
    passing += share >= kMinLinksOffShare;
    detail += fmt("%s %.0f%%, ", p.c_str(), share * 100);
  }
  detail.resize(detail.size() - 2);
  return {7, "links_off_half_the_time", passing >= kMinWorkloadsMostlyOff,
          fmt("%d/4 workloads meet it (gated uplinks Off >= 50%% of the run: %s)", passing, detail.c_str())};
}

Verdict generator_fidelity() {
  const Topology topo = build_site(SiteConfig::desk());
  double worst = 1.0;
  std::string detail;
  for (const auto& name : builtin_profiles()) {
    const auto prof = load_profile(name, LCDC_DATA_DIR);
    const double per_server = static_cast<double>(kFidelitySamples) / static_cast<double>(topo.servers().size());
    const SimTime dur = SimTime::from_seconds(prof.flow_interval_cdf.mean() * (per_server * 1.2 + 10));
    TrafficRng rng(5);
    const auto flows = generate(prof, topo, dur, rng, 1.0);
    std::vector<double> sizes;
    std::map<std::uint32_t, SimTime> last;
    std::vector<double> gaps;
    for (const auto& f : flows) {
      if (sizes.size() < kFidelitySamples) sizes.push_back(static_cast<double>(f.size_bytes));
      auto [it, fresh] = last.try_emplace(f.src, f.arrival);
      if (!fresh) {
        if (gaps.size() < kFidelitySamples) gaps.push_back((f.arrival - it->second).seconds());
        it->second = f.arrival;
      }
    }
    const double rs = cdf_fidelity(sizes, prof.flow_size_cdf);
    const double ri = cdf_fidelity(gaps, prof.flow_interval_cdf);
    const bool enough = sizes.size() == kFidelitySamples && gaps.size() == kFidelitySamples;
    worst = std::min({worst, rs, ri, enough ? 1.0 : 0.0});
    detail += fmt("%s size %.4f interval %.4f, ", name.c_str(), rs, ri);
  }
  detail.resize(detail.size() - 2);
  return {8, "generator_fidelity", worst >= kMinFidelity, detail};
}

Verdict power_anchors() {
  using namespace lcdc::power;
  const auto sc = PowerScenario::load(std::filesystem::path(LCDC_DATA_DIR) / "power" / "default.ini");
  struct Anchor {
    std::string what;
    double value, lo, hi;
  };
  std::vector<Anchor> anchors;
  const auto near = [](std::string what, double v, double target) {
    return Anchor{std::move(what), v, target - kPowerTolerance, target + kPowerTolerance};
  };
  // 64-port switch, 140 W average draw, 1 W SFP+ per port.
  anchors.push_back(near("switch tx share 1/3", switch_transceiver_fraction(64, 1.0, 140.0), 1.0 / 3.0));
  // Left-most bars: peak-power servers take 92-95% in every design.
  double lo = 1, hi = 0;
  for (const auto& d : sc.designs) {
    const double s = breakdown(d, ServerPowerCurve::peak(), 1.0, {}).share(kServers);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  anchors.push_back({"peak server share min", lo, 0.92 - kPowerTolerance, 0.95 + kPowerTolerance});
  anchors.push_back({"peak server share max", hi, 0.92 - kPowerTolerance, 0.95 + kPowerTolerance});
  const auto rows = savings_table(sc);
  const auto at = [&](double u) {
    return *std::find_if(rows.begin(), rows.end(), [&](const SavingsRow& r) { return std::abs(r.utilization - u) < 1e-9; });
  };
  anchors.push_back(near("tx share after ladder", at(0.3).transceiver_share, 0.20));
  anchors.push_back(near("tx+phy+nic share after ladder", at(0.3).transceiver_share + at(0.3).phy_nic_share, 0.46));
  anchors.push_back(near("dc savings tx @30%", at(0.3).savings_transceivers, 0.12));
  anchors.push_back(near("dc savings tx+phy+nic @30%", at(0.3).savings_with_phy_nic, 0.27));
  anchors.push_back(near("dc savings tx+phy+nic @50%", at(0.5).savings_with_phy_nic, 0.23));
  anchors.push_back(near("dc savings tx+phy+nic @70%", at(0.7).savings_with_phy_nic, 0.21));
  int ok = 0;
  std::string detail;
  for (const auto& a : anchors) {
    const bool in = a.value >= a.lo - 1e-12 && a.value <= a.hi + 1e-12;
    ok += in;
    detail += fmt("%s %.1f%% [%.0f-%.0f] %s; ", a.what.c_str(), a.value * 100, a.lo * 100, a.hi * 100,
                  in ? "ok" : "OUT");
  }
  detail.resize(detail.size() - 2);
  return {9, "power_model_anchors", ok == static_cast<int>(anchors.size()),
          fmt("%d/%zu anchors within 1 pp: %s", ok, anchors.size(), detail.c_str())};
}

Verdict determinism(RunCache& cache) {
  int ok = 0;
  for (const auto& [k, r] : cache.all()) ok += r.replay_ok;
  return {10, "deterministic_replay", ok == static_cast<int>(cache.all().size()),
          fmt("%d/%zu scenarios replay to an identical trace hash", ok, cache.all().size())};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  RunCache cache;
  std::vector<Verdict> verdicts;
  verdicts.push_back(never_sever(cache));
  verdicts.push_back(node_zero_penalty(cache));
  verdicts.push_back(codec());
  verdicts.push_back(watermark_machine());
  verdicts.push_back(headline(cache));
  verdicts.push_back(activation_time(cache));
  verdicts.push_back(generator_fidelity());
  verdicts.push_back(power_anchors());
  // These two look back over every run made above.
  verdicts.push_back(zero_gating_loss(cache));
  verdicts.push_back(determinism(cache));
  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });

  int failed = 0;
  for (const auto& v : verdicts) {
    failed += !v.pass;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", v.id, v.name.c_str(), v.detail.c_str());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/%zu criteria passed in %.0f s\n", static_cast<int>(verdicts.size()) - failed, verdicts.size(), secs);
  return failed;
}
