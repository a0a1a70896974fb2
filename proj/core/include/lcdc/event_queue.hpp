#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "lcdc/hash.hpp"
#include "lcdc/sim_time.hpp"

namespace lcdc {

enum class EventKind : std::uint8_t {
  kFlowInjection,   // flow submitted at a server
  kPacketsReady,    // TCP/IP pipeline finished, packets reach the NIC
  kNicTxDone,       // NIC finished serializing a packet
  kNicIdleCheck,    // NIC laser idle timeout check
  kPacketArrival,   // packet fully received at a switch input
  kArbitrate,       // ingress arbiter pass
  kPipelineDone,    // packet leaves the switch pipeline, enters scheduling
  kPortTxDone,      // switch output port finished serializing
  kDelivery,        // packet received by its destination server
  kLaserReady,      // a switch transceiver finished turning on
  kStageRecheck,    // hold-down expiry, re-run the backlog monitor
  kTimer,           // generic timer (tests, tools)
};

struct Event {
  SimTime fire_at;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kTimer;
  std::uint32_t target = 0;
  std::uint64_t payload = 0;
};

/// Min-queue on (fire_at, seq). Sequence numbers are assigned on push from a
/// counter owned by the queue, so equal timestamps pop in insertion order.
class EventQueue {
 public:
  std::uint64_t push(SimTime at, EventKind kind, std::uint32_t target = 0,
                     std::uint64_t payload = 0);
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

class EventHandler {
 public:
  virtual ~EventHandler() = default;
  virtual void handle(const Event& ev) = 0;
};

struct SimulationSummary {
  std::uint64_t events_processed = 0;
  SimTime final_clock;
  std::uint64_t trace_hash = 0;

  bool operator==(const SimulationSummary&) const = default;
};

/// Single-threaded discrete-event kernel.
class Engine {
 public:
  SimTime now() const { return now_; }

  // Throws std::logic_error when `at` lies in the past.
  std::uint64_t schedule(SimTime at, EventKind kind, std::uint32_t target = 0,
                         std::uint64_t payload = 0);
  std::uint64_t schedule_in(SimTime delay, EventKind kind, std::uint32_t target = 0,
                            std::uint64_t payload = 0) {
    return schedule(now_ + delay, kind, target, payload);
  }

  // Dispatches every event with fire_at <= t_end, then parks the clock at t_end.
  SimulationSummary run_until(SimTime t_end, EventHandler& handler);

  std::size_t pending() const { return queue_.size(); }
  std::uint64_t events_processed() const { return processed_; }
  std::uint64_t trace_hash() const { return trace_.digest(); }

 private:
  EventQueue queue_;
  SimTime now_;
  std::uint64_t processed_ = 0;
  Fnv1a trace_;
};

}  // namespace lcdc
