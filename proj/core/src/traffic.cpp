#include "lcdc/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lcdc/hash.hpp"

namespace lcdc {

EmpiricalCdf::EmpiricalCdf(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("CDF has no points");
  double prev_v = -INFINITY;
  double prev_p = 0.0;
  for (const auto& [v, p] : points_) {
    if (!std::isfinite(v) || !std::isfinite(p)) throw std::invalid_argument("CDF point not finite");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("CDF probability outside [0,1]");
    if (v < prev_v) throw std::invalid_argument("CDF values must be non-decreasing");
    if (p < prev_p) throw std::invalid_argument("CDF probabilities must be non-decreasing");
    prev_v = v;
    prev_p = p;
  }
  if (std::abs(points_.back().second - 1.0) > 1e-9) {
    throw std::invalid_argument("CDF must end at probability 1");
  }
  points_.back().second = 1.0;
}

EmpiricalCdf EmpiricalCdf::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CDF file " + path.string());
  std::vector<std::pair<double, double>> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double v = 0, p = 0;
    if (!(ss >> v)) continue;
    std::string rest;
    if (!(ss >> p) || (ss >> rest)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 'value probability'");
    }
    pts.emplace_back(v, p);
  }
  try {
    return EmpiricalCdf(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

double EmpiricalCdf::sample(double u) const {
  if (u <= points_.front().second) return points_.front().first;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto& [v1, p1] = points_[i];
    if (u <= p1) {
      const auto& [v0, p0] = points_[i - 1];
      if (p1 == p0) return v1;
      return v0 + (u - p0) / (p1 - p0) * (v1 - v0);
    }
  }
  return points_.back().first;
}

double EmpiricalCdf::evaluate(double x) const {
  if (x < points_.front().first) return 0.0;
  if (x >= points_.back().first) return 1.0;
  double result = points_.front().second;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto& [v0, p0] = points_[i - 1];
    const auto& [v1, p1] = points_[i];
    if (x >= v1) {
      result = p1;
      continue;
    }
    if (x >= v0 && v1 > v0) result = p0 + (x - v0) / (v1 - v0) * (p1 - p0);
    break;
  }
  return result;
}

double EmpiricalCdf::mean() const {
  double m = points_.front().first * points_.front().second;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto& [v0, p0] = points_[i - 1];
    const auto& [v1, p1] = points_[i];
    m += (p1 - p0) * 0.5 * (v0 + v1);
  }
  return m;
}

void LocalityMix::validate() const {
  for (double f : {intra_rack, intra_cluster, inter_cluster}) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("workload.locality fractions must lie in [0,1]");
  }
  if (std::abs(intra_rack + intra_cluster + inter_cluster - 1.0) > 1e-6) {
    throw std::invalid_argument("workload.locality fractions must sum to 1");
  }
}

const std::vector<std::string>& builtin_profiles() {
  static const std::vector<std::string> names{"fb-web", "fb-cache", "fb-hadoop", "ms-dc"};
  return names;
}

LocalityMix default_locality(const std::string& profile) {
  if (profile == "fb-web") return {0.1, 0.5, 0.4};
  if (profile == "fb-cache") return {0.05, 0.7, 0.25};
  if (profile == "fb-hadoop") return {0.6, 0.3, 0.1};
  if (profile == "ms-dc") return {0.5, 0.4, 0.1};
  throw std::invalid_argument("unknown workload profile '" + profile + "'");
}

WorkloadProfile load_profile(const std::string& name, const std::filesystem::path& data_dir) {
  WorkloadProfile p;
  p.name = name;
  p.locality = default_locality(name);
  const auto dir = data_dir / "workloads";
  p.flow_size_cdf = EmpiricalCdf::load(dir / (name + ".size.cdf"));
  p.flow_interval_cdf = EmpiricalCdf::load(dir / (name + ".interval.cdf"));
  return p;
}

double interval_scale_for_load(const WorkloadProfile& profile, double load, double server_link_bps) {
  if (!(load > 0.0 && load <= 1.0)) throw std::invalid_argument("workload.load must lie in (0,1]");
  const double bits = profile.flow_size_cdf.mean() * 8.0;
  const double interval = profile.flow_interval_cdf.mean();
  if (!(interval > 0.0)) throw std::invalid_argument("flow interval CDF has zero mean");
  return bits / (load * server_link_bps * interval);
}

std::uint32_t pick_destination(const SiteConfig& site, std::uint32_t src, const LocalityMix& mix,
                               TrafficRng& rng) {
  const std::uint32_t spr = site.servers_per_rack;
  const std::uint32_t per_cluster = spr * site.rsw_per_cluster;
  const std::uint32_t total = per_cluster * site.clusters;
  const std::uint32_t rack_base = src / spr * spr;
  const std::uint32_t cluster_base = src / per_cluster * per_cluster;

  // Candidate counts for each scope, excluding the source's own narrower scope.
  const std::uint32_t n_rack = spr - 1;
  const std::uint32_t n_cluster = per_cluster - spr;
  const std::uint32_t n_inter = total - per_cluster;

  const double u = rng.uniform();
  int scope = u < mix.intra_rack ? 0 : (u < mix.intra_rack + mix.intra_cluster ? 1 : 2);
  const std::uint32_t counts[3] = {n_rack, n_cluster, n_inter};
  if (counts[scope] == 0) {
    // Widen first, then narrow, when the chosen scope has no other servers.
    int alt = -1;
    for (int s = scope + 1; s < 3 && alt < 0; ++s) if (counts[s] > 0) alt = s;
    for (int s = scope - 1; s >= 0 && alt < 0; --s) if (counts[s] > 0) alt = s;
    if (alt < 0) return src;
    scope = alt;
  }
  const auto pick = static_cast<std::uint32_t>(rng.below(counts[scope]));
  switch (scope) {
    case 0: {
      std::uint32_t off = pick >= src - rack_base ? pick + 1 : pick;
      return rack_base + off;
    }
    case 1: {
      std::uint32_t off = pick >= rack_base - cluster_base ? pick + spr : pick;
      return cluster_base + off;
    }
    default: {
      std::uint32_t off = pick >= cluster_base ? pick + per_cluster : pick;
      return off;
    }
  }
}

std::vector<FlowSpec> generate(const WorkloadProfile& profile, const Topology& topo,
                               SimTime duration, TrafficRng& rng, double interval_scale) {
  profile.locality.validate();
  if (!(interval_scale > 0.0)) throw std::invalid_argument("interval scale must be positive");
  std::vector<FlowSpec> flows;
  const auto n = static_cast<std::uint32_t>(topo.servers().size());
  const double horizon = duration.seconds();
  for (std::uint32_t s = 0; s < n; ++s) {
    double t = 0.0;
    for (;;) {
      t += profile.flow_interval_cdf.sample(rng.uniform()) * interval_scale;
      if (t >= horizon) break;
      const double size = profile.flow_size_cdf.sample(rng.uniform());
      FlowSpec f;
      f.src = s;
      f.dst = pick_destination(topo.config(), s, profile.locality, rng);
      f.size_bytes = static_cast<std::uint64_t>(std::max(1.0, std::round(size)));
      f.arrival = SimTime::from_seconds(t);
      if (f.dst != f.src) flows.push_back(f);
    }
  }
  std::stable_sort(flows.begin(), flows.end(), [](const FlowSpec& a, const FlowSpec& b) {
    return a.arrival < b.arrival;
  });
  for (std::uint32_t i = 0; i < flows.size(); ++i) flows[i].id = i;
  return flows;
}

double pearson_r(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_r needs two equally sized vectors of length >= 2");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw std::domain_error("pearson_r: zero variance");
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> fidelity_grid(const EmpiricalCdf& cdf, std::size_t extra) {
  std::vector<double> grid;
  for (const auto& pt : cdf.points()) grid.push_back(pt.first);
  const double lo = cdf.min(), hi = cdf.max();
  if (extra > 1 && hi > lo) {
    const bool log_spaced = lo > 0.0;
    for (std::size_t i = 0; i < extra; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(extra - 1);
      grid.push_back(log_spaced ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double cdf_fidelity(std::vector<double> samples, const EmpiricalCdf& target) {
  if (samples.empty()) throw std::invalid_argument("cdf_fidelity: no samples");
  std::sort(samples.begin(), samples.end());
  const auto grid = fidelity_grid(target);
  std::vector<double> emp, ref;
  emp.reserve(grid.size());
  ref.reserve(grid.size());
  for (double x : grid) {
    const auto below = std::upper_bound(samples.begin(), samples.end(), x) - samples.begin();
    emp.push_back(static_cast<double>(below) / static_cast<double>(samples.size()));
    ref.push_back(target.evaluate(x));
  }
  return pearson_r(emp, ref);
}

TraceLoad parse_trace(std::istream& in, std::uint32_t num_servers) {
  if (num_servers < 2) throw std::invalid_argument("trace replay needs at least two servers");
  TraceLoad out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    ++out.record_lines;
    std::istringstream ss(line);
    double arrival = 0;
    std::string src, dst, extra;
    long long size = 0;
    if (!(ss >> arrival >> src >> dst >> size) || (ss >> extra) || !std::isfinite(arrival) ||
        arrival < 0.0 || size <= 0) {
      out.malformed_lines.push_back(lineno);
      continue;
    }
    FlowSpec f;
    f.src = static_cast<std::uint32_t>(fnv1a(src) % num_servers);
    f.dst = static_cast<std::uint32_t>(fnv1a(dst) % num_servers);
    if (f.dst == f.src) f.dst = (f.dst + 1) % num_servers;
    f.size_bytes = static_cast<std::uint64_t>(size);
    f.arrival = SimTime::from_seconds(arrival);
    out.flows.push_back(f);
  }
  if (out.malformed_lines.size() * 100 > out.record_lines) {
    std::string msg = "trace rejected: " + std::to_string(out.malformed_lines.size()) + " of " +
                      std::to_string(out.record_lines) + " records malformed (lines";
    for (std::size_t i = 0; i < out.malformed_lines.size() && i < 10; ++i) {
      msg += " " + std::to_string(out.malformed_lines[i]);
    }
    if (out.malformed_lines.size() > 10) msg += " ...";
    throw std::runtime_error(msg + ")");
  }
  std::stable_sort(out.flows.begin(), out.flows.end(),
                   [](const FlowSpec& a, const FlowSpec& b) { return a.arrival < b.arrival; });
  for (std::uint32_t i = 0; i < out.flows.size(); ++i) out.flows[i].id = i;
  return out;
}

TraceLoad load_trace(const std::filesystem::path& path, std::uint32_t num_servers) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  return parse_trace(in, num_servers);
}

}  // namespace lcdc
