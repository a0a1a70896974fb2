// lcdc-sim: scenario runner and power calculator.
//
// Exit codes: 0 success, 1 runtime error, 2 invalid configuration or
// arguments, 3 determinism check failed.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lcdc/power_model.hpp"
#include "lcdc/report.hpp"
#include "lcdc/scenario.hpp"
#include "lcdc/simulation.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitReplay = 3;

struct RunArgs {
  std::string config;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_ms;
  std::optional<std::string> scale;
  std::optional<std::string> output_dir;
  std::vector<std::string> overrides;
  bool verify_replay = false;
  bool quiet = false;
};

struct PowerArgs {
  std::string scenario;
  std::optional<double> savings;
  std::optional<std::string> csv_dir;
  double ladder_utilization = 0.3;
};

lcdc::ScenarioConfig effective_config(const RunArgs& a) {
  lcdc::ScenarioConfig cfg = a.config.empty() ? lcdc::ScenarioConfig{} : lcdc::ScenarioConfig::load(a.config);
  if (a.scale) cfg.site = lcdc::site_preset(*a.scale);
  for (const auto& o : a.overrides) cfg.apply_override(o);
  if (a.mode) cfg.run.mode = lcdc::parse_mode(*a.mode);
  if (a.seed) cfg.run.seed = *a.seed;
  if (a.duration_ms) {
    if (*a.duration_ms < 0) throw std::invalid_argument("--duration must be >= 0");
    cfg.run.duration = lcdc::SimTime::from_seconds(*a.duration_ms * 1e-3);
  }
  if (a.output_dir) cfg.run.output_dir = *a.output_dir;
  cfg.validate();
  return cfg;
}

void print_run(const lcdc::RunMetrics& m) {
  const auto us = [](const std::optional<double>& ps) { return ps ? *ps * 1e-6 : 0.0; };
  std::printf("%-9s flows %llu/%llu  packets %llu delivered  drops buffer=%llu gating=%llu  mean latency %.3f us  "
              "energy %.6f J  trace %s\n",
              lcdc::to_string(m.mode), static_cast<unsigned long long>(m.flows_completed),
              static_cast<unsigned long long>(m.flows_injected),
              static_cast<unsigned long long>(m.packets_delivered),
              static_cast<unsigned long long>(m.drops.buffer), static_cast<unsigned long long>(m.drops.gating),
              us(m.packet_latency.mean_ps()), m.headline_energy_j, lcdc::hex64(m.trace_hash).c_str());
}

int do_run(const RunArgs& a) {
  lcdc::ScenarioConfig cfg;
  try {
    cfg = effective_config(a);
  } catch (const std::exception& e) {
    std::cerr << "lcdc-sim: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  }
  const bool want_gated = cfg.run.mode != lcdc::ModeSelection::kAlwaysOn;
  const bool want_base = cfg.run.mode != lcdc::ModeSelection::kGated;
  std::optional<lcdc::RunMetrics> gated, base;
  try {
    if (want_gated) gated = lcdc::run_scenario(cfg, lcdc::RunMode::kGated);
    if (want_base) base = lcdc::run_scenario(cfg, lcdc::RunMode::kAlwaysOn);
  } catch (const std::invalid_argument& e) {
    std::cerr << "lcdc-sim: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "lcdc-sim: run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  if (a.verify_replay) {
    for (const auto* m : {gated ? &*gated : nullptr, base ? &*base : nullptr}) {
      if (!m) continue;
      const auto again = lcdc::run_scenario(cfg, m->mode);
      if (again.trace_hash != m->trace_hash || again.events != m->events) {
        std::cerr << "lcdc-sim: replay mismatch in " << lcdc::to_string(m->mode) << " run: "
                  << lcdc::hex64(m->trace_hash) << " vs " << lcdc::hex64(again.trace_hash) << '\n';
        return kExitReplay;
      }
    }
  }
  std::optional<lcdc::SavingsReport> savings;
  if (gated && base) savings = lcdc::savings_report(*gated, *base);
  try {
    lcdc::write_reports(cfg.run.output_dir, cfg, gated ? &*gated : nullptr, base ? &*base : nullptr, savings);
  } catch (const std::exception& e) {
    std::cerr << "lcdc-sim: " << e.what() << '\n';
    return kExitRuntime;
  }
  if (!a.quiet) {
    if (gated) print_run(*gated);
    if (base) print_run(*base);
    if (savings) {
      std::printf("transceiver savings %.2f%%  latency overhead %s\n", savings->transceiver_savings * 100,
                  savings->latency_overhead ? (std::to_string(*savings->latency_overhead * 100) + "%").c_str()
                                            : "n/a");
    }
    if (a.verify_replay) std::printf("replay verified\n");
    std::printf("reports written to %s\n", cfg.run.output_dir.c_str());
  }
  return 0;
}

int do_power(const PowerArgs& a) {
  lcdc::power::PowerScenario sc;
  try {
    const std::filesystem::path path =
        a.scenario.empty() ? lcdc::default_data_dir() / "power" / "default.ini" : std::filesystem::path(a.scenario);
    sc = lcdc::power::PowerScenario::load(path);
    if (a.savings) {
      sc.network_savings = *a.savings;
      sc.validate();
    }
  } catch (const std::exception& e) {
    std::cerr << "lcdc-sim: invalid power scenario: " << e.what() << '\n';
    return kExitConfig;
  }
  const auto rows = lcdc::power::savings_table(sc);
  std::printf("network savings %.1f%%, server curve %s, %zu designs\n", sc.network_savings * 100,
              sc.curve.c_str(), sc.designs.size());
  std::printf("%-11s %-10s %-14s %-19s %s\n", "utilization", "tx_share", "phy_nic_share", "dc_savings_tx",
              "dc_savings_tx_phy_nic");
  for (const auto& r : rows) {
    std::printf("%-11.0f %-10.4f %-14.4f %-19.4f %.4f\n", r.utilization * 100, r.transceiver_share,
                r.phy_nic_share, r.savings_transceivers, r.savings_with_phy_nic);
  }
  if (a.csv_dir) {
    try {
      std::filesystem::create_directories(*a.csv_dir);
      const std::filesystem::path dir(*a.csv_dir);
      std::FILE* f = std::fopen((dir / "savings.csv").c_str(), "w");
      std::FILE* g = std::fopen((dir / "ladder.csv").c_str(), "w");
      if (!f || !g) throw std::runtime_error("cannot write CSV files in " + *a.csv_dir);
      std::fputs(lcdc::power::savings_csv(rows).c_str(), f);
      std::fputs(lcdc::power::ladder_csv(lcdc::power::ladder_bars(sc, a.ladder_utilization)).c_str(), g);
      std::fclose(f);
      std::fclose(g);
    } catch (const std::exception& e) {
      std::cerr << "lcdc-sim: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laser-gated data center network simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write JSON/CSV reports");
  run_cmd->add_option("--config", run.config, "Scenario config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--mode", run.mode, "gated | always-on | both");
  run_cmd->add_option("--seed", run.seed, "Workload seed");
  run_cmd->add_option("--duration", run.duration_ms, "Simulated time in milliseconds");
  run_cmd->add_option("--scale", run.scale, "Site preset: full | desk | tiny");
  run_cmd->add_option("--output-dir", run.output_dir, "Report directory");
  run_cmd->add_option("--set", run.overrides, "Override section.key=value (repeatable)");
  run_cmd->add_flag("--verify-replay", run.verify_replay, "Run twice and compare trace hashes");
  run_cmd->add_flag("--quiet", run.quiet, "Suppress the console summary");

  PowerArgs power;
  auto* power_cmd = app.add_subcommand("power-report", "Data center power breakdown and savings table");
  power_cmd->add_option("--scenario", power.scenario, "Power scenario file")->check(CLI::ExistingFile);
  power_cmd->add_option("--savings", power.savings, "Network transceiver savings fraction");
  power_cmd->add_option("--csv-dir", power.csv_dir, "Write savings.csv and ladder.csv here");
  power_cmd->add_option("--ladder-utilization", power.ladder_utilization, "Utilization for ladder.csv")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*run_cmd) return do_run(run);
  return do_power(power);
}
