#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcdc/sim_time.hpp"
#include "lcdc/topology.hpp"

namespace lcdc {

/// Piecewise-linear cumulative distribution given as (value, probability)
/// points. A first probability above zero is a point mass at the first value.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  // Throws std::invalid_argument when the points are not a valid CDF.
  explicit EmpiricalCdf(std::vector<std::pair<double, double>> points);

  // "value probability" per line; '#' starts a comment.
  static EmpiricalCdf load(const std::filesystem::path& path);

  // Inverse-transform sample for u in [0, 1).
  double sample(double u) const;
  // Cumulative probability at x.
  double evaluate(double x) const;
  double mean() const;
  double min() const { return points_.front().first; }
  double max() const { return points_.back().first; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

struct LocalityMix {
  double intra_rack = 0.1;
  double intra_cluster = 0.5;
  double inter_cluster = 0.4;

  void validate() const;
  bool operator==(const LocalityMix&) const = default;
};

struct WorkloadProfile {
  std::string name;
  EmpiricalCdf flow_size_cdf;      // bytes
  EmpiricalCdf flow_interval_cdf;  // seconds between flows of one server
  LocalityMix locality;
};

// Built-in profile names: fb-web, fb-cache, fb-hadoop, ms-dc.
const std::vector<std::string>& builtin_profiles();
LocalityMix default_locality(const std::string& profile);
// Reads <data_dir>/workloads/<name>.size.cdf and <name>.interval.cdf.
WorkloadProfile load_profile(const std::string& name, const std::filesystem::path& data_dir);

struct FlowSpec {
  std::uint32_t id = 0;
  std::uint32_t src = 0;  // server index
  std::uint32_t dst = 0;
  std::uint64_t size_bytes = 0;
  SimTime arrival;

  bool operator==(const FlowSpec&) const = default;
};

/// Seeded generator state. Uniform variates are built from the top 53 bits of
/// a 64-bit Mersenne twister so streams are identical across standard libraries.
class TrafficRng {
 public:
  explicit TrafficRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

// Multiplier applied to sampled intervals so that the mean offered load per
// server equals `load` x `server_link_bps`.
double interval_scale_for_load(const WorkloadProfile& profile, double load, double server_link_bps);

// Flows from every server over [0, duration), sorted by (arrival, src).
std::vector<FlowSpec> generate(const WorkloadProfile& profile, const Topology& topo,
                               SimTime duration, TrafficRng& rng, double interval_scale = 1.0);

// Destination server for `src` under the locality mix.
std::uint32_t pick_destination(const SiteConfig& site, std::uint32_t src, const LocalityMix& mix,
                               TrafficRng& rng);

// Pearson correlation of two equally sized vectors. Throws std::domain_error
// when either has zero variance.
double pearson_r(std::span<const double> a, std::span<const double> b);

// Evaluation grid: the CDF's own support points plus `extra` points spaced
// logarithmically (linearly when the support touches zero).
std::vector<double> fidelity_grid(const EmpiricalCdf& cdf, std::size_t extra = 64);

// Pearson r between the empirical CDF of `samples` and `target` on the grid.
double cdf_fidelity(std::vector<double> samples, const EmpiricalCdf& target);

struct TraceLoad {
  std::vector<FlowSpec> flows;
  std::vector<std::size_t> malformed_lines;  // 1-based
  std::size_t record_lines = 0;
};

// "arrival_seconds src_token dst_token size_bytes" per line. Tokens hash onto
// server indices. Throws std::runtime_error naming the bad lines when more
// than 1% of records are malformed.
TraceLoad load_trace(const std::filesystem::path& path, std::uint32_t num_servers);
TraceLoad parse_trace(std::istream& in, std::uint32_t num_servers);

}  // namespace lcdc
