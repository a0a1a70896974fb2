#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "lcdc/sim_time.hpp"
#include "lcdc/transceiver.hpp"

namespace lcdc {

struct NodePipelineParams {
  SimTime pipeline_latency = SimTime::ns(3200);  // measured sendmsg -> transmit
  SimTime nic_idle_timeout = SimTime::us(100);
  std::uint32_t mtu = 1500;
  bool gate_nic = true;

  // Sum of the per-layer literature figures: 950 + 260 + 550 + 430 + 400 + 760
  // + 400 ns.
  static constexpr SimTime kLiteraturePipeline = SimTime::ns(3750);
  static constexpr SimTime kMeasuredPipeline = SimTime::ns(3200);

  void validate() const;
  bool operator==(const NodePipelineParams&) const = default;
};

// ceil(size / mtu) packet sizes, all MTU-sized except a trailing remainder.
// Throws std::invalid_argument for zero-byte flows or a zero MTU.
std::vector<std::uint32_t> flow_to_packets(std::uint64_t size_bytes, std::uint32_t mtu);

// First bit leaves once the stack has produced the packet and the laser is on.
inline SimTime first_bit_time(SimTime submit, SimTime pipeline_latency, SimTime laser_ready) {
  const SimTime ready = submit + pipeline_latency;
  return ready < laser_ready ? laser_ready : ready;
}

/// Server NIC: a FIFO of packets handed over by the TCP/IP stack and an
/// egress laser that is switched on as soon as a send is intercepted.
class ServerNic {
 public:
  ServerNic(NodePipelineParams params, TransceiverParams laser);

  // Early warning: the laser starts turning on at `t`. Returns when the
  // flow's packets reach the NIC.
  SimTime submit_flow(SimTime t);
  // Packets of one flow arrive from the stack.
  void packets_ready(const std::vector<std::uint32_t>& packet_ids);

  bool can_transmit(SimTime t) const;
  bool busy() const { return transmitting_; }
  bool has_pending() const { return !fifo_.empty(); }
  std::uint32_t pop_next();
  void start_tx() { transmitting_ = true; }
  void tx_done(SimTime t);

  // Turns the laser off when idle for the timeout with no work in flight.
  // Returns true when a request_off was issued.
  bool nic_idle_check(SimTime t);

  SimTime laser_ready_at(SimTime t) { return laser_.request_on(t); }
  SimTime last_tx() const { return last_tx_; }
  const Transceiver& laser() const { return laser_; }
  const NodePipelineParams& params() const { return params_; }

 private:
  NodePipelineParams params_;
  Transceiver laser_;
  std::deque<std::uint32_t> fifo_;
  std::uint32_t in_pipeline_ = 0;
  bool transmitting_ = false;
  SimTime last_tx_;
};

}  // namespace lcdc
