#pragma once

#include <boost/dynamic_bitset.hpp>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lcdc/sim_time.hpp"
#include "lcdc/topology.hpp"

namespace lcdc {

/// One bit per physical output port.
using PortMask = boost::dynamic_bitset<std::uint64_t>;

inline constexpr double kSwitchClockHz = 169.32e6;
inline constexpr std::uint32_t kPipelineCycles = 7;

// Lookup (2) + stage map (2) + scheduler (2) + enqueue (1) cycles, rounded to ps.
SimTime switch_pipeline_delay();
// Pipeline plus serialization of `frame_bytes` at the output port rate.
SimTime switch_transit_delay(std::uint64_t frame_bytes, double port_bps);

struct LookupResult {
  LogicalPort logical_port = 0;
  bool multicast = false;
  std::optional<PortIndex> local_port;  // destination host hangs off this switch
};

/// Destination MAC -> logical port, and per-stage logical port -> permitted
/// physical ports. Stage maps are consulted for the currently active stage
/// only; the detour map applies when none of the permitted ports is usable.
class CamTables {
 public:
  CamTables() = default;
  CamTables(std::size_t num_ports, std::uint32_t num_stages, std::uint32_t num_logical);

  void program_logical(std::uint64_t mac, LogicalPort lp, bool multicast = false);
  void program_host(std::uint64_t mac, LogicalPort self, PortIndex port);
  void program_stage_map(std::uint32_t stage, LogicalPort lp, PortMask ports);
  void program_detour(LogicalPort lp, PortMask ports);

  std::optional<LookupResult> lookup_logical(std::uint64_t dst_mac) const;
  const PortMask& stage_map(std::uint32_t stage, LogicalPort lp) const;
  const PortMask& detour(LogicalPort lp) const;

  std::uint32_t num_stages() const { return static_cast<std::uint32_t>(stage_maps_.size()); }
  std::size_t num_ports() const { return num_ports_; }
  std::uint32_t num_logical() const { return num_logical_; }

 private:
  std::size_t num_ports_ = 0;
  std::uint32_t num_logical_ = 0;
  std::unordered_map<std::uint64_t, LookupResult> logical_;
  std::vector<std::vector<PortMask>> stage_maps_;  // [stage-1][logical port]
  std::vector<PortMask> detour_;
  PortMask empty_;
};

/// Unicast: the permitted, usable port with minimum backlog (lowest index on
/// ties). Multicast: every permitted, usable port. Empty when nothing fits.
std::vector<PortIndex> schedule_output(const PortMask& map, const PortMask& usable,
                                       std::span<const std::uint32_t> backlogs, bool multicast);

/// Round-robin over physical inputs, with the virtual (locally generated
/// control) port always served first.
template <typename T>
class IngressArbiter {
 public:
  static constexpr std::size_t kVirtualPort = static_cast<std::size_t>(-1);

  explicit IngressArbiter(std::size_t num_inputs)
      : inputs_(num_inputs), last_served_(num_inputs == 0 ? 0 : num_inputs - 1) {}

  void push(std::size_t input, T item) {
    inputs_.at(input).push_back(std::move(item));
    ++pending_;
  }
  void push_virtual(T item) {
    virtual_.push_back(std::move(item));
    ++pending_;
  }
  bool empty() const { return pending_ == 0; }
  std::size_t pending() const { return pending_; }

  // (input index or kVirtualPort, item)
  std::optional<std::pair<std::size_t, T>> next() {
    if (!virtual_.empty()) {
      T item = std::move(virtual_.front());
      virtual_.pop_front();
      --pending_;
      return std::pair<std::size_t, T>{kVirtualPort, std::move(item)};
    }
    const std::size_t n = inputs_.size();
    for (std::size_t step = 1; step <= n; ++step) {
      const std::size_t i = (last_served_ + step) % n;
      if (inputs_[i].empty()) continue;
      T item = std::move(inputs_[i].front());
      inputs_[i].pop_front();
      last_served_ = i;
      --pending_;
      return std::pair<std::size_t, T>{i, std::move(item)};
    }
    return std::nullopt;
  }

  void set_last_served(std::size_t i) { last_served_ = i; }

 private:
  std::vector<std::deque<T>> inputs_;
  std::deque<T> virtual_;
  std::size_t last_served_;
  std::size_t pending_ = 0;
};

struct Watermarks {
  double high = 0.75;
  double low = 0.22;

  void validate() const;
  bool operator==(const Watermarks&) const = default;
};

enum class StageTrigger : std::uint8_t { kNone, kStageUp, kStageDown };

const char* to_string(StageTrigger t);

/// Compares output-queue depths (packets) against the watermarks. Thresholds
/// are held in parts-per-million so depth comparisons are exact.
class BacklogMonitor {
 public:
  BacklogMonitor(std::uint32_t capacity, Watermarks marks);

  bool above_high(std::uint32_t depth) const;
  bool below_low(std::uint32_t depth) const;

  // `uplink_depths` are the queues of the currently active gated uplinks.
  StageTrigger evaluate(std::span<const std::uint32_t> uplink_depths, std::uint32_t active_stage,
                        std::uint32_t max_stage, bool holddown_expired) const;

  std::uint32_t capacity() const { return capacity_; }
  const Watermarks& watermarks() const { return marks_; }

 private:
  std::uint32_t capacity_;
  Watermarks marks_;
  std::uint64_t high_ppm_;
  std::uint64_t low_ppm_;
};

}  // namespace lcdc
