#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcdc/sim_time.hpp"

namespace lcdc {

/// Latency accumulator with a log-bucket percentile sketch. Bucket i covers
/// (gamma^(i-1), gamma^i] picoseconds, so reported quantiles carry at most
/// (gamma-1)/(gamma+1) relative error. Exact samples are kept on request.
class LatencyStats {
 public:
  static constexpr double kDefaultGamma = 1.02;

  explicit LatencyStats(bool keep_samples = false, double gamma = kDefaultGamma);

  // Throws std::logic_error when delivered precedes injected.
  void record_delivery(SimTime injected, SimTime delivered);
  void record(SimTime latency);
  void merge(const LatencyStats& other);

  std::uint64_t count() const { return count_; }
  std::uint64_t sum_ps() const { return sum_ps_; }
  std::optional<double> mean_ps() const;
  // Nearest-rank quantile, q in (0, 1]. Exact when samples are kept.
  std::optional<double> percentile_ps(double q) const;
  std::optional<double> max_ps() const;
  const std::vector<std::uint64_t>& samples() const { return samples_; }
  bool keeps_samples() const { return keep_samples_; }

 private:
  int bucket_of(std::uint64_t ps) const;
  double bucket_value(int idx) const;

  bool keep_samples_;
  double gamma_;
  double log_gamma_;
  std::uint64_t count_ = 0;
  std::uint64_t sum_ps_ = 0;
  std::uint64_t max_ps_ = 0;
  std::uint64_t zeros_ = 0;
  std::map<int, std::uint64_t> buckets_;
  std::vector<std::uint64_t> samples_;
};

/// On/Off intervals for a set of links over [start, end], plus the share of
/// time the network spent with a given fraction of these links on.
class ActivationTimeline {
 public:
  struct Interval {
    SimTime begin;
    SimTime end;
    bool on = false;
  };

  ActivationTimeline(std::vector<std::uint32_t> link_ids, std::vector<bool> initially_on,
                     SimTime start = SimTime{}, std::uint32_t buckets = 8);

  // Records a state change of tracked link `slot` at t (non-decreasing time).
  void set(std::uint32_t slot, SimTime t, bool on);
  void finish(SimTime end);

  std::size_t size() const { return link_ids_.size(); }
  std::uint32_t link_id(std::uint32_t slot) const { return link_ids_.at(slot); }
  const std::vector<Interval>& intervals(std::uint32_t slot) const { return intervals_.at(slot); }
  bool finished() const { return finished_; }
  SimTime start() const { return start_; }
  SimTime end() const { return end_; }

  std::uint64_t off_time_ps(std::uint32_t slot) const;
  double off_fraction(std::uint32_t slot) const;
  // Fraction of tracked links Off for at least `min_time_fraction` of the run.
  double fraction_of_links_off_at_least(double min_time_fraction) const;
  // Time-weighted mean fraction of tracked links that are on.
  double mean_on_fraction() const;

  // Bucket b holds the share of time with on-fraction in [b/B, (b+1)/B),
  // the last bucket closed at 1.
  const std::vector<double>& histogram() const { return histogram_; }
  std::uint32_t bucket_count() const { return static_cast<std::uint32_t>(hist_ps_.size()); }

 private:
  void advance(SimTime t);

  std::vector<std::uint32_t> link_ids_;
  std::vector<std::vector<Interval>> intervals_;
  SimTime start_;
  SimTime end_;
  SimTime cursor_;
  std::uint32_t on_count_ = 0;
  std::vector<std::uint64_t> hist_ps_;
  std::vector<double> histogram_;
  bool finished_ = false;
};

enum class RunMode : std::uint8_t { kGated, kAlwaysOn };

const char* to_string(RunMode m);

/// Per-transceiver energy ledger entry.
struct LedgerEntry {
  std::uint32_t link_id = 0;
  std::uint32_t node_id = 0;
  bool headline = false;  // counted in the headline savings figure
  double energy_j = 0;
};

struct DropCounters {
  std::uint64_t buffer = 0;
  std::uint64_t gating = 0;
  std::uint64_t lookup = 0;
  std::uint64_t control_unknown = 0;

  std::uint64_t total_data() const { return buffer + gating + lookup; }
  bool operator==(const DropCounters&) const = default;
};

/// Everything a completed run reports.
struct RunMetrics {
  RunMode mode = RunMode::kGated;
  // Digest of the effective configuration with the run mode left out, so a
  // gated run and its baseline compare equal when they share workload and seed.
  std::uint64_t config_digest = 0;
  SimTime duration;
  std::uint64_t trace_hash = 0;
  std::uint64_t events = 0;

  std::uint64_t flows_injected = 0;
  std::uint64_t flows_completed = 0;
  std::uint64_t packets_injected = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_in_flight = 0;
  DropCounters drops;
  std::uint64_t control_frames_sent = 0;
  std::uint64_t control_max_hops = 0;  // longest path any control frame took
  std::uint64_t stage_activations = 0;
  std::uint64_t stage_deactivations = 0;
  std::uint64_t connectivity_probes = 0;
  std::uint64_t connectivity_failures = 0;

  LatencyStats packet_latency;   // flow submit -> delivery
  LatencyStats network_latency;  // first NIC bit -> delivery
  std::vector<SimTime> flow_completion;  // per flow id, SimTime::max() if unfinished

  std::vector<LedgerEntry> ledger;
  double headline_energy_j = 0;
  double total_energy_j = 0;

  std::optional<ActivationTimeline> timeline;  // gated uplinks only
};

// Sum over the ledger in ledger order; equals the reported totals exactly.
double ledger_total(const std::vector<LedgerEntry>& ledger, bool headline_only);

struct SavingsReport {
  double transceiver_savings = 0;      // headline set
  double all_transceiver_savings = 0;  // every transceiver in the network
  std::optional<double> latency_overhead;
  std::optional<double> network_latency_overhead;
  std::vector<double> activation_histogram;
  std::optional<double> links_mostly_off;  // share of gated uplinks Off >= 50% of the run
};

// Throws std::invalid_argument when the runs differ in configuration or are
// not one gated and one always-on run.
SavingsReport savings_report(const RunMetrics& gated, const RunMetrics& baseline);

}  // namespace lcdc
