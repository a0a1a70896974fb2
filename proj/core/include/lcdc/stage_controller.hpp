#pragma once

#include <cstdint>
#include <vector>

#include "lcdc/control_frame.hpp"
#include "lcdc/sim_time.hpp"

namespace lcdc {

enum class StageStatus : std::uint8_t { kIdle, kActivating, kActive, kDraining, kDeactivating };

const char* to_string(StageStatus s);

/// Side effects the stage state machine asks its switch to perform.
class StageActions {
 public:
  virtual ~StageActions() = default;
  // Starts the stage's uplink laser; returns when it will be On.
  virtual SimTime request_laser_on(std::uint32_t stage) = 0;
  virtual void request_laser_off(std::uint32_t stage) = 0;
  virtual void send_control(ControlOpcode op, std::uint32_t stage) = 0;
  // True when the stage's output queue is empty and nothing is on the wire.
  virtual bool uplink_drained(std::uint32_t stage) = 0;
  // Any stage status changed (usable-port masks must be refreshed).
  virtual void stages_changed() = 0;
};

/// Stage activation/deactivation for the gated uplinks of one switch.
///
/// Stage 1 is permanently Active. Stages change one at a time: activation
/// needs both the local laser ready and the peer's ack; deactivation drains
/// the top stage, then sends Disable, and powers the laser off on the ack.
class StageController {
 public:
  enum class Outcome : std::uint8_t { kIgnored, kStarted, kCancelled, kCompleted, kProgressed };

  StageController(std::uint32_t max_stage, SimTime holddown, bool all_active = false);

  std::uint32_t max_stage() const { return static_cast<std::uint32_t>(status_.size()); }
  std::uint32_t active_stage() const { return active_; }
  StageStatus status(std::uint32_t stage) const { return status_.at(stage - 1); }
  bool in_transition() const;
  bool holddown_expired(SimTime now) const { return now >= holddown_until_; }
  SimTime holddown_until() const { return holddown_until_; }

  Outcome stage_up(SimTime now, StageActions& act);
  Outcome stage_down(SimTime now, StageActions& act);
  Outcome on_laser_ready(std::uint32_t stage, SimTime now, StageActions& act);
  Outcome on_ack_enable(std::uint32_t stage, SimTime now, StageActions& act);
  Outcome on_drained(std::uint32_t stage, SimTime now, StageActions& act);
  Outcome on_ack_disable(std::uint32_t stage, SimTime now, StageActions& act);

  std::uint64_t activations() const { return activations_; }
  std::uint64_t deactivations() const { return deactivations_; }

 private:
  Outcome maybe_complete_activation(std::uint32_t stage, SimTime now, StageActions& act);

  std::vector<StageStatus> status_;
  std::vector<char> laser_ready_;
  std::vector<char> acked_;
  std::uint32_t active_ = 1;
  SimTime holddown_;
  SimTime holddown_until_;
  std::uint64_t activations_ = 0;
  std::uint64_t deactivations_ = 0;
};

}  // namespace lcdc
