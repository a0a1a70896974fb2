#pragma once

#include <cstdint>
#include <vector>

#include "lcdc/sim_time.hpp"

namespace lcdc {

enum class LaserMode : std::uint8_t { kOff, kTurningOn, kOn, kTurningOff };

const char* to_string(LaserMode m);

struct TransceiverParams {
  SimTime turn_on_delay = SimTime::us(1);
  SimTime turn_off_delay = SimTime::us(10);
  double power_on_w = 1.0;
  double power_off_w = 0.0;

  void validate() const;

  static TransceiverParams sfp_plus() { return {}; }
  static TransceiverParams qsfp() {
    TransceiverParams p;
    p.power_on_w = 2.4;
    return p;
  }

  bool operator==(const TransceiverParams&) const = default;
};

/// Laser state machine for one link endpoint. The mode is a step function of
/// time: each request appends the transition it starts together with the
/// automatic completion of that transition, so the ledger can be integrated
/// over any window. Transitional modes are charged at full power.
class Transceiver {
 public:
  explicit Transceiver(TransceiverParams params, LaserMode initial = LaserMode::kOn,
                       SimTime start = SimTime{});

  // Returns the time the laser is (or will be) On. Idempotent while On or
  // TurningOn. A request during TurningOff aborts the shutdown and restarts
  // the full turn-on delay from `t`.
  SimTime request_on(SimTime t);

  // Returns the time the laser reaches Off. Throws std::logic_error unless On.
  SimTime request_off(SimTime t);

  LaserMode mode_at(SimTime t) const;
  SimTime last_transition() const { return history_.back().start; }

  // Picoseconds spent in `mode` within [t0, t1).
  std::uint64_t time_in_mode(LaserMode mode, SimTime t0, SimTime t1) const;
  // Picoseconds drawing full power (anything but Off) within [t0, t1).
  std::uint64_t powered_time(SimTime t0, SimTime t1) const;
  double energy_in(SimTime t0, SimTime t1) const;
  // Energy of the same window had the laser been On throughout.
  double baseline_energy(SimTime t0, SimTime t1) const;

  const TransceiverParams& params() const { return params_; }

  struct Segment {
    SimTime start;
    LaserMode mode;
  };
  const std::vector<Segment>& history() const { return history_; }

 private:
  TransceiverParams params_;
  std::vector<Segment> history_;
};

}  // namespace lcdc
