#include "lcdc/stage_controller.hpp"

#include <stdexcept>

namespace lcdc {

const char* to_string(StageStatus s) {
  switch (s) {
    case StageStatus::kIdle: return "idle";
    case StageStatus::kActivating: return "activating";
    case StageStatus::kActive: return "active";
    case StageStatus::kDraining: return "draining";
    case StageStatus::kDeactivating: return "deactivating";
  }
  return "?";
}

StageController::StageController(std::uint32_t max_stage, SimTime holddown, bool all_active)
    : status_(max_stage, StageStatus::kIdle),
      laser_ready_(max_stage, 0),
      acked_(max_stage, 0),
      holddown_(holddown) {
  if (max_stage == 0) throw std::invalid_argument("StageController: needs at least one stage");
  status_[0] = StageStatus::kActive;
  if (all_active) {
    for (auto& s : status_) s = StageStatus::kActive;
    active_ = max_stage;
  }
}

bool StageController::in_transition() const {
  for (StageStatus s : status_) {
    if (s == StageStatus::kActivating || s == StageStatus::kDraining ||
        s == StageStatus::kDeactivating) {
      return true;
    }
  }
  return false;
}

StageController::Outcome StageController::stage_up(SimTime now, StageActions& act) {
  (void)now;
  StageStatus& top = status_[active_ - 1];
  if (top == StageStatus::kDraining) {
    top = StageStatus::kActive;
    act.stages_changed();
    return Outcome::kCancelled;
  }
  if (in_transition() || active_ >= max_stage()) return Outcome::kIgnored;
  const std::uint32_t k = active_ + 1;
  status_[k - 1] = StageStatus::kActivating;
  laser_ready_[k - 1] = 0;
  acked_[k - 1] = 0;
  act.request_laser_on(k);
  act.send_control(ControlOpcode::kEnable, k);
  act.stages_changed();
  return Outcome::kStarted;
}

StageController::Outcome StageController::maybe_complete_activation(std::uint32_t stage,
                                                                    SimTime now,
                                                                    StageActions& act) {
  if (!laser_ready_[stage - 1] || !acked_[stage - 1]) return Outcome::kProgressed;
  status_[stage - 1] = StageStatus::kActive;
  active_ = stage;
  holddown_until_ = now + holddown_;
  ++activations_;
  act.stages_changed();
  return Outcome::kCompleted;
}

StageController::Outcome StageController::on_laser_ready(std::uint32_t stage, SimTime now,
                                                         StageActions& act) {
  if (stage < 1 || stage > max_stage() || status_[stage - 1] != StageStatus::kActivating) {
    return Outcome::kIgnored;
  }
  laser_ready_[stage - 1] = 1;
  return maybe_complete_activation(stage, now, act);
}

StageController::Outcome StageController::on_ack_enable(std::uint32_t stage, SimTime now,
                                                        StageActions& act) {
  if (stage < 1 || stage > max_stage() || status_[stage - 1] != StageStatus::kActivating) {
    return Outcome::kIgnored;
  }
  acked_[stage - 1] = 1;
  return maybe_complete_activation(stage, now, act);
}

StageController::Outcome StageController::stage_down(SimTime now, StageActions& act) {
  if (active_ <= 1 || in_transition() || !holddown_expired(now)) return Outcome::kIgnored;
  status_[active_ - 1] = StageStatus::kDraining;
  act.stages_changed();
  if (act.uplink_drained(active_)) on_drained(active_, now, act);
  return Outcome::kStarted;
}

StageController::Outcome StageController::on_drained(std::uint32_t stage, SimTime now,
                                                     StageActions& act) {
  (void)now;
  if (stage < 1 || stage > max_stage() || status_[stage - 1] != StageStatus::kDraining) {
    return Outcome::kIgnored;
  }
  status_[stage - 1] = StageStatus::kDeactivating;
  act.send_control(ControlOpcode::kDisable, stage);
  act.stages_changed();
  return Outcome::kProgressed;
}

StageController::Outcome StageController::on_ack_disable(std::uint32_t stage, SimTime now,
                                                         StageActions& act) {
  if (stage < 1 || stage > max_stage() || status_[stage - 1] != StageStatus::kDeactivating) {
    return Outcome::kIgnored;
  }
  act.request_laser_off(stage);
  status_[stage - 1] = StageStatus::kIdle;
  active_ = stage - 1;
  holddown_until_ = now + holddown_;
  ++deactivations_;
  act.stages_changed();
  return Outcome::kCompleted;
}

}  // namespace lcdc
