#include "lcdc/event_queue.hpp"

#include <stdexcept>
#include <string>

namespace lcdc {

std::uint64_t EventQueue::push(SimTime at, EventKind kind, std::uint32_t target,
                               std::uint64_t payload) {
  const std::uint64_t seq = next_seq_++;
  heap_.push(Event{at, seq, kind, target, payload});
  return seq;
}

Event EventQueue::pop() {
  Event ev = heap_.top();
  heap_.pop();
  return ev;
}

std::uint64_t Engine::schedule(SimTime at, EventKind kind, std::uint32_t target,
                               std::uint64_t payload) {
  if (at < now_) {
    throw std::logic_error("Engine::schedule: event at " + std::to_string(at.ticks()) +
                           " ps precedes clock " + std::to_string(now_.ticks()) + " ps");
  }
  return queue_.push(at, kind, target, payload);
}

SimulationSummary Engine::run_until(SimTime t_end, EventHandler& handler) {
  while (!queue_.empty() && queue_.top().fire_at <= t_end) {
    const Event ev = queue_.pop();
    now_ = ev.fire_at;
    trace_.add_u64(ev.fire_at.ticks());
    trace_.add_u64(static_cast<std::uint64_t>(ev.kind));
    trace_.add_u64(ev.target);
    trace_.add_u64(ev.payload);
    ++processed_;
    handler.handle(ev);
  }
  if (now_ < t_end) now_ = t_end;
  return SimulationSummary{processed_, now_, trace_.digest()};
}

}  // namespace lcdc
