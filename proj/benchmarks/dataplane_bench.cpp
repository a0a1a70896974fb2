#include <benchmark/benchmark.h>

#include <random>

#include "lcdc/control_frame.hpp"
#include "lcdc/switch_dataplane.hpp"

namespace {

using namespace lcdc;

void BM_EncodeDecode(benchmark::State& state) {
  LcdcControlFrame f;
  f.sender_id = 77;
  f.stage_id = LcdcControlFrame::pack_stage_id(ControlOpcode::kEnable, 3);
  f.ttl = 3;
  for (auto _ : state) {
    const auto bytes = encode_control(f);
    benchmark::DoNotOptimize(decode_control(bytes));
  }
}
BENCHMARK(BM_EncodeDecode);

void BM_MonitorEvaluate(benchmark::State& state) {
  const BacklogMonitor mon(128, Watermarks{});
  std::mt19937 rng(3);
  std::vector<std::uint32_t> depths(4);
  for (auto& d : depths) d = rng() % 129;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mon.evaluate(depths, 4, 4, true));
  }
}
BENCHMARK(BM_MonitorEvaluate);

}  // namespace
