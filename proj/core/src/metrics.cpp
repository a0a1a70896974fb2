#include "lcdc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lcdc {

LatencyStats::LatencyStats(bool keep_samples, double gamma)
    : keep_samples_(keep_samples), gamma_(gamma), log_gamma_(std::log(gamma)) {
  if (!(gamma > 1.0)) throw std::invalid_argument("LatencyStats: gamma must exceed 1");
}

void LatencyStats::record_delivery(SimTime injected, SimTime delivered) {
  if (delivered < injected) throw std::logic_error("LatencyStats: delivery precedes injection");
  record(delivered - injected);
}

int LatencyStats::bucket_of(std::uint64_t ps) const {
  return static_cast<int>(std::ceil(std::log(static_cast<double>(ps)) / log_gamma_));
}

double LatencyStats::bucket_value(int idx) const {
  return 2.0 * std::pow(gamma_, idx) / (gamma_ + 1.0);
}

void LatencyStats::record(SimTime latency) {
  const std::uint64_t ps = latency.ticks();
  ++count_;
  sum_ps_ += ps;
  max_ps_ = std::max(max_ps_, ps);
  if (ps == 0) {
    ++zeros_;
  } else {
    ++buckets_[bucket_of(ps)];
  }
  if (keep_samples_) samples_.push_back(ps);
}

void LatencyStats::merge(const LatencyStats& other) {
  if (other.gamma_ != gamma_) throw std::invalid_argument("LatencyStats: merging different gammas");
  count_ += other.count_;
  sum_ps_ += other.sum_ps_;
  max_ps_ = std::max(max_ps_, other.max_ps_);
  zeros_ += other.zeros_;
  for (const auto& [k, v] : other.buckets_) buckets_[k] += v;
  if (keep_samples_ && other.keep_samples_) {
    samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
  } else {
    keep_samples_ = false;
    samples_.clear();
  }
}

std::optional<double> LatencyStats::mean_ps() const {
  if (count_ == 0) return std::nullopt;
  return static_cast<double>(sum_ps_) / static_cast<double>(count_);
}

std::optional<double> LatencyStats::max_ps() const {
  if (count_ == 0) return std::nullopt;
  return static_cast<double>(max_ps_);
}

std::optional<double> LatencyStats::percentile_ps(double q) const {
  if (count_ == 0) return std::nullopt;
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile must lie in (0,1]");
  const auto rank = static_cast<std::uint64_t>(std::max(1.0, std::ceil(q * static_cast<double>(count_))));
  if (keep_samples_) {
    std::vector<std::uint64_t> sorted = samples_;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    return static_cast<double>(sorted[rank - 1]);
  }
  std::uint64_t seen = zeros_;
  if (seen >= rank) return 0.0;
  for (const auto& [idx, n] : buckets_) {
    seen += n;
    if (seen >= rank) return std::min(bucket_value(idx), static_cast<double>(max_ps_));
  }
  return static_cast<double>(max_ps_);
}

ActivationTimeline::ActivationTimeline(std::vector<std::uint32_t> link_ids,
                                       std::vector<bool> initially_on, SimTime start,
                                       std::uint32_t buckets)
    : link_ids_(std::move(link_ids)),
      intervals_(link_ids_.size()),
      start_(start),
      end_(start),
      cursor_(start),
      hist_ps_(buckets, 0) {
  if (initially_on.size() != link_ids_.size()) {
    throw std::invalid_argument("ActivationTimeline: state vector size mismatch");
  }
  if (buckets == 0) throw std::invalid_argument("ActivationTimeline: needs at least one bucket");
  for (std::size_t i = 0; i < link_ids_.size(); ++i) {
    intervals_[i].push_back({start, start, initially_on[i]});
    on_count_ += initially_on[i] ? 1 : 0;
  }
}

void ActivationTimeline::advance(SimTime t) {
  if (t < cursor_) throw std::logic_error("ActivationTimeline: time went backwards");
  if (t == cursor_) return;
  const auto b = static_cast<std::uint32_t>(hist_ps_.size());
  std::uint32_t bucket = 0;
  if (!link_ids_.empty()) {
    bucket = static_cast<std::uint32_t>(static_cast<std::uint64_t>(on_count_) * b / link_ids_.size());
    bucket = std::min(bucket, b - 1);
  }
  hist_ps_[bucket] += (t - cursor_).ticks();
  cursor_ = t;
}

void ActivationTimeline::set(std::uint32_t slot, SimTime t, bool on) {
  if (finished_) throw std::logic_error("ActivationTimeline: already finished");
  auto& iv = intervals_.at(slot);
  if (iv.back().on == on) return;
  advance(t);
  iv.back().end = t;
  if (iv.back().begin == t) {
    iv.back().on = on;
    // Merge with the previous interval when a zero-length flip restores it.
    if (iv.size() > 1 && iv[iv.size() - 2].on == on) iv.pop_back();
  } else {
    iv.push_back({t, t, on});
  }
  on_count_ = on ? on_count_ + 1 : on_count_ - 1;
}

void ActivationTimeline::finish(SimTime end) {
  if (finished_) return;
  advance(end);
  end_ = end;
  for (auto& iv : intervals_) iv.back().end = end;
  const double total = static_cast<double>((end_ - start_).ticks());
  histogram_.assign(hist_ps_.size(), 0.0);
  for (std::size_t i = 0; i < hist_ps_.size(); ++i) {
    histogram_[i] = total > 0 ? static_cast<double>(hist_ps_[i]) / total : 0.0;
  }
  finished_ = true;
}

std::uint64_t ActivationTimeline::off_time_ps(std::uint32_t slot) const {
  std::uint64_t off = 0;
  for (const auto& iv : intervals_.at(slot)) {
    if (!iv.on) off += (iv.end - iv.begin).ticks();
  }
  return off;
}

double ActivationTimeline::off_fraction(std::uint32_t slot) const {
  const auto total = (end_ - start_).ticks();
  return total == 0 ? 0.0 : static_cast<double>(off_time_ps(slot)) / static_cast<double>(total);
}

double ActivationTimeline::fraction_of_links_off_at_least(double min_time_fraction) const {
  if (link_ids_.empty()) return 0.0;
  std::size_t n = 0;
  for (std::uint32_t i = 0; i < link_ids_.size(); ++i) {
    if (off_fraction(i) >= min_time_fraction) ++n;
  }
  return static_cast<double>(n) / static_cast<double>(link_ids_.size());
}

double ActivationTimeline::mean_on_fraction() const {
  if (link_ids_.empty()) return 0.0;
  double acc = 0;
  for (std::uint32_t i = 0; i < link_ids_.size(); ++i) acc += 1.0 - off_fraction(i);
  return acc / static_cast<double>(link_ids_.size());
}

const char* to_string(RunMode m) { return m == RunMode::kGated ? "gated" : "always-on"; }

double ledger_total(const std::vector<LedgerEntry>& ledger, bool headline_only) {
  double sum = 0;
  for (const auto& e : ledger) {
    if (!headline_only || e.headline) sum += e.energy_j;
  }
  return sum;
}

SavingsReport savings_report(const RunMetrics& gated, const RunMetrics& baseline) {
  if (gated.mode != RunMode::kGated || baseline.mode != RunMode::kAlwaysOn) {
    throw std::invalid_argument("savings_report: expects a gated run and an always-on baseline");
  }
  if (gated.config_digest != baseline.config_digest || gated.duration != baseline.duration) {
    throw std::invalid_argument("savings_report: runs were made with different configurations");
  }
  SavingsReport r;
  r.transceiver_savings =
      baseline.headline_energy_j > 0 ? 1.0 - gated.headline_energy_j / baseline.headline_energy_j : 0.0;
  r.all_transceiver_savings =
      baseline.total_energy_j > 0 ? 1.0 - gated.total_energy_j / baseline.total_energy_j : 0.0;
  const auto gm = gated.packet_latency.mean_ps();
  const auto bm = baseline.packet_latency.mean_ps();
  if (gm && bm && *bm > 0) r.latency_overhead = *gm / *bm - 1.0;
  const auto gn = gated.network_latency.mean_ps();
  const auto bn = baseline.network_latency.mean_ps();
  if (gn && bn && *bn > 0) r.network_latency_overhead = *gn / *bn - 1.0;
  if (gated.timeline && gated.timeline->finished()) {
    r.activation_histogram = gated.timeline->histogram();
    r.links_mostly_off = gated.timeline->fraction_of_links_off_at_least(0.5);
  }
  return r;
}

}  // namespace lcdc
