#include <gtest/gtest.h>

#include "lcdc/server_node.hpp"

namespace lcdc {
namespace {

TEST(FlowToPackets, Splits) {
  EXPECT_EQ(flow_to_packets(4000, 1500), (std::vector<std::uint32_t>{1500, 1500, 1000}));
  EXPECT_EQ(flow_to_packets(100, 1500), (std::vector<std::uint32_t>{100}));
  EXPECT_EQ(flow_to_packets(1500, 1500), (std::vector<std::uint32_t>{1500}));
  EXPECT_THROW(flow_to_packets(0, 1500), std::invalid_argument);
}

TEST(FirstBit, PipelineHidesTurnOn) {
  const SimTime t = SimTime::us(7);
  // Laser ready after 1 us, stack done after 3.2 us.
  EXPECT_EQ(first_bit_time(t, SimTime::ns(3200), t + SimTime::us(1)), t + SimTime::ns(3200));
  EXPECT_EQ(first_bit_time(t, SimTime::ns(3200), SimTime{}), t + SimTime::ns(3200));
  EXPECT_EQ(first_bit_time(t, SimTime::ns(3200), t + SimTime::us(5)), t + SimTime::us(5));
}

TEST(PipelinePresets, LiteratureBreakdownSums) {
  EXPECT_EQ(NodePipelineParams::kLiteraturePipeline,
            SimTime::ns(950 + 260 + 550 + 430 + 400 + 760 + 400));
  EXPECT_EQ(NodePipelineParams{}.pipeline_latency, SimTime::ns(3200));
}

TEST(ServerNic, EarlyWarningTurnsLaserOn) {
  ServerNic nic(NodePipelineParams{}, TransceiverParams{});
  EXPECT_EQ(nic.laser().mode_at(SimTime{}), LaserMode::kOff);
  const SimTime ready = nic.submit_flow(SimTime::us(2));
  EXPECT_EQ(ready, SimTime::us(2) + SimTime::ns(3200));
  EXPECT_EQ(nic.laser().mode_at(SimTime::us(3)), LaserMode::kOn);
  nic.packets_ready({1, 2});
  EXPECT_TRUE(nic.can_transmit(ready));
  EXPECT_EQ(nic.pop_next(), 1u);
}

TEST(ServerNic, IdleTimeout) {
  NodePipelineParams p;
  ServerNic nic(p, TransceiverParams{});
  nic.submit_flow(SimTime{});
  nic.packets_ready({1});
  nic.pop_next();
  nic.start_tx();
  EXPECT_FALSE(nic.nic_idle_check(SimTime::us(500)));  // still transmitting
  nic.tx_done(SimTime::us(4));
  EXPECT_FALSE(nic.nic_idle_check(SimTime::us(103)));
  EXPECT_TRUE(nic.nic_idle_check(SimTime::us(104)));
  EXPECT_EQ(nic.laser().mode_at(SimTime::us(114)), LaserMode::kOff);
}

TEST(ServerNic, PendingWorkBlocksTurnOff) {
  ServerNic nic(NodePipelineParams{}, TransceiverParams{});
  nic.submit_flow(SimTime{});
  EXPECT_FALSE(nic.nic_idle_check(SimTime::us(150)));  // flow still in the stack
  nic.packets_ready({1});
  EXPECT_FALSE(nic.nic_idle_check(SimTime::us(150)));  // queued packet
}

TEST(ServerNic, UngatedNicStaysOn) {
  NodePipelineParams p;
  p.gate_nic = false;
  ServerNic nic(p, TransceiverParams{});
  EXPECT_EQ(nic.laser().mode_at(SimTime{}), LaserMode::kOn);
  EXPECT_FALSE(nic.nic_idle_check(SimTime::ms(1)));
}

TEST(ServerNic, ResubmitDuringShutdownRestartsTurnOn) {
  ServerNic nic(NodePipelineParams{}, TransceiverParams{});
  nic.submit_flow(SimTime{});
  nic.packets_ready({1});
  nic.pop_next();
  nic.start_tx();
  nic.tx_done(SimTime::us(4));
  ASSERT_TRUE(nic.nic_idle_check(SimTime::us(104)));
  const SimTime t = SimTime::us(108);
  const SimTime ready = nic.submit_flow(t);
  EXPECT_EQ(nic.laser().mode_at(t + SimTime::us(1)), LaserMode::kOn);
  EXPECT_EQ(first_bit_time(t, nic.params().pipeline_latency, t + SimTime::us(1)), ready);
}

}  // namespace
}  // namespace lcdc
