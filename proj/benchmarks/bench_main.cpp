// Copyright 2026 The twdm-sched Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "twdm/exact_oracle.hpp"
#include "twdm/merging_engine.hpp"
#include "twdm/sim_runner.hpp"
#include "twdm/traffic.hpp"

namespace {

twdm::ScenarioConfig config_for(int channels, std::int64_t gbps, double load) {
  twdm::ScenarioConfig c;
  c.num_channels = channels;
  c.channel_rate = twdm::LineRate::gbps(gbps);
  c.load_fraction = load;
  c.sla_share = 0.7;
  return c;
}

void BM_GenerateFrame(benchmark::State& state) {
  const auto c = config_for(8, 25, 0.8);
  const twdm::TrafficGenerator gen(c);
  std::int64_t f = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen.generate(f++));
}
BENCHMARK(BM_GenerateFrame);

// Merge cost per frame; pregenerated frames keep the generator out of the loop.
void BM_MergeFrame(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  const auto c = config_for(channels, 200 / channels, 0.8);
  const twdm::TrafficGenerator gen(c);
  std::vector<std::vector<twdm::VirtualBmap>> frames;
  for (std::int64_t f = 0; f < 256; ++f) frames.push_back(gen.generate(f));
  twdm::SlaTracker tracker(gen.flows(), c.window_frames);
  twdm::MergingEngine engine(c);
  std::int64_t f = 0;
  for (auto _ : state) {
    auto maps = frames[static_cast<std::size_t>(f % 256)];
    for (auto& m : maps) {
      m.frame_index = f;
      for (auto& a : m.allocations) a.frame_index = f;
    }
    auto out = engine.merge_frame(maps, tracker);
    for (std::size_t i = 0; i < out.served.size(); ++i)
      tracker.record_grant(out.served[i].flow_id, out.delays[i], f);
    tracker.recompute_rates(f);
    ++f;
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_MergeFrame)->Arg(8)->Arg(4)->Arg(1);

void BM_Scenario(benchmark::State& state) {
  auto c = config_for(8, 25, 0.8);
  c.num_frames = 500;
  c.tuning_time = std::chrono::nanoseconds(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(twdm::run_scenario(c));
  state.SetItemsProcessed(state.iterations() * c.num_frames);
}
BENCHMARK(BM_Scenario)->Arg(0)->Arg(15'000)->Unit(benchmark::kMillisecond);

void BM_SolveExact(benchmark::State& state) {
  twdm::InstanceShape shape;
  shape.max_slots = twdm::kOracleMaxSlots;
  shape.min_allocations = static_cast<int>(state.range(0));
  shape.max_allocations = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto inst = twdm::random_instance(seed++, shape);
    benchmark::DoNotOptimize(twdm::solve_exact(inst));
  }
}
BENCHMARK(BM_SolveExact)->Arg(4)->Arg(6)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
