#include "lcdc/switch_dataplane.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lcdc {

SimTime switch_pipeline_delay() {
  return SimTime::ps(static_cast<std::uint64_t>(
      std::llround(static_cast<double>(kPipelineCycles) / kSwitchClockHz * 1e12)));
}

SimTime switch_transit_delay(std::uint64_t frame_bytes, double port_bps) {
  return switch_pipeline_delay() + serialization_time(frame_bytes, port_bps);
}

CamTables::CamTables(std::size_t num_ports, std::uint32_t num_stages, std::uint32_t num_logical)
    : num_ports_(num_ports),
      num_logical_(num_logical),
      stage_maps_(num_stages, std::vector<PortMask>(num_logical, PortMask(num_ports))),
      detour_(num_logical, PortMask(num_ports)),
      empty_(num_ports) {
  if (num_stages == 0) throw std::invalid_argument("CamTables: at least one stage required");
}

void CamTables::program_logical(std::uint64_t mac, LogicalPort lp, bool multicast) {
  if (lp >= num_logical_) throw std::out_of_range("CamTables: logical port out of range");
  logical_[mac] = LookupResult{lp, multicast, std::nullopt};
}

void CamTables::program_host(std::uint64_t mac, LogicalPort self, PortIndex port) {
  if (port >= num_ports_) throw std::out_of_range("CamTables: host port out of range");
  logical_[mac] = LookupResult{self, false, port};
}

void CamTables::program_stage_map(std::uint32_t stage, LogicalPort lp, PortMask ports) {
  if (stage < 1 || stage > stage_maps_.size()) throw std::out_of_range("CamTables: bad stage");
  if (lp >= num_logical_) throw std::out_of_range("CamTables: logical port out of range");
  if (ports.size() != num_ports_) throw std::invalid_argument("CamTables: mask width mismatch");
  stage_maps_[stage - 1][lp] = std::move(ports);
}

void CamTables::program_detour(LogicalPort lp, PortMask ports) {
  if (lp >= num_logical_) throw std::out_of_range("CamTables: logical port out of range");
  if (ports.size() != num_ports_) throw std::invalid_argument("CamTables: mask width mismatch");
  detour_[lp] = std::move(ports);
}

std::optional<LookupResult> CamTables::lookup_logical(std::uint64_t dst_mac) const {
  auto it = logical_.find(dst_mac);
  if (it == logical_.end()) return std::nullopt;
  return it->second;
}

const PortMask& CamTables::stage_map(std::uint32_t stage, LogicalPort lp) const {
  if (stage < 1 || stage > stage_maps_.size() || lp >= num_logical_) return empty_;
  return stage_maps_[stage - 1][lp];
}

const PortMask& CamTables::detour(LogicalPort lp) const {
  if (lp >= num_logical_) return empty_;
  return detour_[lp];
}

std::vector<PortIndex> schedule_output(const PortMask& map, const PortMask& usable,
                                       std::span<const std::uint32_t> backlogs, bool multicast) {
  std::vector<PortIndex> out;
  const PortMask allowed = map & usable;
  if (multicast) {
    for (auto p = allowed.find_first(); p != PortMask::npos; p = allowed.find_next(p)) {
      out.push_back(static_cast<PortIndex>(p));
    }
    return out;
  }
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
  for (auto p = allowed.find_first(); p != PortMask::npos; p = allowed.find_next(p)) {
    if (backlogs[p] < best) {
      best = backlogs[p];
      out.assign(1, static_cast<PortIndex>(p));
    }
  }
  return out;
}

void Watermarks::validate() const {
  if (!(low >= 0.0) || !(low < high) || !(high <= 1.0)) {
    throw std::invalid_argument("watermarks: require 0 <= low < high <= 1");
  }
}

const char* to_string(StageTrigger t) {
  switch (t) {
    case StageTrigger::kNone: return "none";
    case StageTrigger::kStageUp: return "stage-up";
    case StageTrigger::kStageDown: return "stage-down";
  }
  return "?";
}

BacklogMonitor::BacklogMonitor(std::uint32_t capacity, Watermarks marks)
    : capacity_(capacity),
      marks_(marks),
      high_ppm_(static_cast<std::uint64_t>(std::llround(marks.high * 1e6))),
      low_ppm_(static_cast<std::uint64_t>(std::llround(marks.low * 1e6))) {
  marks.validate();
  if (capacity == 0) throw std::invalid_argument("BacklogMonitor: capacity must be > 0");
}

bool BacklogMonitor::above_high(std::uint32_t depth) const {
  return std::uint64_t{depth} * 1'000'000ULL > high_ppm_ * capacity_;
}

bool BacklogMonitor::below_low(std::uint32_t depth) const {
  return std::uint64_t{depth} * 1'000'000ULL < low_ppm_ * capacity_;
}

StageTrigger BacklogMonitor::evaluate(std::span<const std::uint32_t> uplink_depths,
                                      std::uint32_t active_stage, std::uint32_t max_stage,
                                      bool holddown_expired) const {
  bool any_high = false;
  bool all_low = true;
  for (std::uint32_t d : uplink_depths) {
    any_high = any_high || above_high(d);
    all_low = all_low && below_low(d);
  }
  if (any_high && active_stage < max_stage) return StageTrigger::kStageUp;
  if (all_low && active_stage > 1 && holddown_expired) return StageTrigger::kStageDown;
  return StageTrigger::kNone;
}

}  // namespace lcdc
