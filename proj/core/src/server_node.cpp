#include "lcdc/server_node.hpp"

#include <stdexcept>

namespace lcdc {

void NodePipelineParams::validate() const {
  if (pipeline_latency == SimTime{}) throw std::invalid_argument("server: pipeline_latency must be > 0");
  if (mtu == 0) throw std::invalid_argument("server: mtu must be > 0");
}

std::vector<std::uint32_t> flow_to_packets(std::uint64_t size_bytes, std::uint32_t mtu) {
  if (size_bytes == 0) throw std::invalid_argument("flow_to_packets: zero-size flow");
  if (mtu == 0) throw std::invalid_argument("flow_to_packets: zero mtu");
  std::vector<std::uint32_t> out(size_bytes / mtu, mtu);
  if (const auto rem = size_bytes % mtu; rem != 0) out.push_back(static_cast<std::uint32_t>(rem));
  return out;
}

ServerNic::ServerNic(NodePipelineParams params, TransceiverParams laser)
    : params_(params), laser_(laser, params.gate_nic ? LaserMode::kOff : LaserMode::kOn) {
  params_.validate();
}

SimTime ServerNic::submit_flow(SimTime t) {
  if (params_.gate_nic) laser_.request_on(t);
  ++in_pipeline_;
  return t + params_.pipeline_latency;
}

void ServerNic::packets_ready(const std::vector<std::uint32_t>& packet_ids) {
  if (in_pipeline_ == 0) throw std::logic_error("ServerNic: packets without a submitted flow");
  --in_pipeline_;
  fifo_.insert(fifo_.end(), packet_ids.begin(), packet_ids.end());
}

bool ServerNic::can_transmit(SimTime t) const {
  return !transmitting_ && !fifo_.empty() && laser_.mode_at(t) == LaserMode::kOn;
}

std::uint32_t ServerNic::pop_next() {
  const std::uint32_t id = fifo_.front();
  fifo_.pop_front();
  return id;
}

void ServerNic::tx_done(SimTime t) {
  transmitting_ = false;
  last_tx_ = t;
}

bool ServerNic::nic_idle_check(SimTime t) {
  if (!params_.gate_nic) return false;
  if (transmitting_ || !fifo_.empty() || in_pipeline_ != 0) return false;
  if (t - last_tx_ < params_.nic_idle_timeout || t < last_tx_) return false;
  if (laser_.mode_at(t) != LaserMode::kOn) return false;
  laser_.request_off(t);
  return true;
}

}  // namespace lcdc
