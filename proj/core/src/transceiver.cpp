#include "lcdc/transceiver.hpp"

#include <algorithm>
#include <stdexcept>

namespace lcdc {

const char* to_string(LaserMode m) {
  switch (m) {
    case LaserMode::kOff: return "off";
    case LaserMode::kTurningOn: return "turning-on";
    case LaserMode::kOn: return "on";
    case LaserMode::kTurningOff: return "turning-off";
  }
  return "?";
}

void TransceiverParams::validate() const {
  if (turn_on_delay == SimTime{} || turn_off_delay == SimTime{}) {
    throw std::invalid_argument("transceiver: turn-on/turn-off delays must be > 0");
  }
  if (!(power_off_w >= 0.0) || !(power_on_w > power_off_w)) {
    throw std::invalid_argument("transceiver: require power_on > power_off >= 0");
  }
}

Transceiver::Transceiver(TransceiverParams params, LaserMode initial, SimTime start)
    : params_(params) {
  params_.validate();
  if (initial == LaserMode::kTurningOn || initial == LaserMode::kTurningOff) {
    throw std::invalid_argument("Transceiver: initial mode must be On or Off");
  }
  history_.push_back({start, initial});
}

LaserMode Transceiver::mode_at(SimTime t) const {
  auto it = std::upper_bound(history_.begin(), history_.end(), t,
                             [](SimTime v, const Segment& s) { return v < s.start; });
  if (it == history_.begin()) return history_.front().mode;
  return std::prev(it)->mode;
}

SimTime Transceiver::request_on(SimTime t) {
  const LaserMode m = mode_at(t);
  if (m == LaserMode::kOn) return t;
  if (m == LaserMode::kTurningOn) return history_.back().start;  // pending On segment
  if (m == LaserMode::kTurningOff) {
    // Drop the scheduled Off completion; the shutdown never finishes.
    if (history_.back().mode == LaserMode::kOff && history_.back().start > t) history_.pop_back();
  }
  const SimTime ready = t + params_.turn_on_delay;
  history_.push_back({t, LaserMode::kTurningOn});
  history_.push_back({ready, LaserMode::kOn});
  return ready;
}

SimTime Transceiver::request_off(SimTime t) {
  if (t < history_.back().start || mode_at(t) != LaserMode::kOn) {
    throw std::logic_error("Transceiver::request_off: laser is not On");
  }
  const SimTime done = t + params_.turn_off_delay;
  history_.push_back({t, LaserMode::kTurningOff});
  history_.push_back({done, LaserMode::kOff});
  return done;
}

std::uint64_t Transceiver::time_in_mode(LaserMode mode, SimTime t0, SimTime t1) const {
  if (t1 <= t0) return 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < history_.size(); ++i) {
    if (history_[i].mode != mode) continue;
    const SimTime seg_start = std::max(history_[i].start, t0);
    const SimTime seg_end =
        std::min(i + 1 < history_.size() ? history_[i + 1].start : SimTime::max(), t1);
    if (seg_end > seg_start) total += (seg_end - seg_start).ticks();
  }
  // Before the first segment the initial mode applies.
  if (history_.front().mode == mode && t0 < history_.front().start) {
    total += (std::min(t1, history_.front().start) - t0).ticks();
  }
  return total;
}

std::uint64_t Transceiver::powered_time(SimTime t0, SimTime t1) const {
  if (t1 <= t0) return 0;
  return (t1 - t0).ticks() - time_in_mode(LaserMode::kOff, t0, t1);
}

double Transceiver::energy_in(SimTime t0, SimTime t1) const {
  if (t1 <= t0) return 0.0;
  const std::uint64_t off = time_in_mode(LaserMode::kOff, t0, t1);
  const std::uint64_t on = (t1 - t0).ticks() - off;
  return (static_cast<double>(on) * params_.power_on_w +
          static_cast<double>(off) * params_.power_off_w) * 1e-12;
}

double Transceiver::baseline_energy(SimTime t0, SimTime t1) const {
  if (t1 <= t0) return 0.0;
  return static_cast<double>((t1 - t0).ticks()) * params_.power_on_w * 1e-12;
}

}  // namespace lcdc
