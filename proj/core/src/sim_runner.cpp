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

#include "twdm/sim_runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "twdm/rng.hpp"
#include "twdm/sla_tracker.hpp"
#include "twdm/traffic.hpp"

namespace twdm {
namespace {

DelayStats summarize(std::vector<std::int64_t>& delays) {
  DelayStats s;
  s.count = static_cast<std::int64_t>(delays.size());
  if (delays.empty()) return s;
  long double sum = 0;
  for (auto d : delays) sum += d;
  s.mean_ns = static_cast<double>(sum / static_cast<long double>(delays.size()));
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(delays.size())));
  const auto idx = std::max<std::size_t>(rank, 1) - 1;
  std::nth_element(delays.begin(), delays.begin() + static_cast<std::ptrdiff_t>(idx), delays.end());
  s.p99_ns = delays[idx];
  s.max_ns = *std::max_element(delays.begin(), delays.end());
  return s;
}

std::uint64_t per_mille(double x) { return static_cast<std::uint64_t>(std::llround(x * 1000.0)); }

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  ScenarioResult result;
  result.config = config;
  result.base_seed = config.seed;

  const TrafficGenerator generator(config);
  SlaTracker tracker(generator.flows(), config.window_frames, config.window_mode);
  MergingEngine engine(config);
  engine.set_fault_injection(options.fault);
  std::optional<InvariantChecker> checker;
  if (options.check_invariants) checker.emplace(config);

  result.sla_flows = tracker.sla_flow_count();
  const std::int64_t warmup = config.window_frames;
  std::vector<std::int64_t> low_delays;
  std::vector<std::int64_t> standard_delays;

  for (std::int64_t k = 0; k < config.num_frames; ++k) {
    const auto vbmaps = generator.generate(k);
    if (checker) checker->observe_inputs(vbmaps);
    const MergeOutcome out = engine.merge_frame(vbmaps, tracker);
    if (checker) checker->observe(out);

    const bool measured = k >= warmup;
    for (std::size_t i = 0; i < out.served.size(); ++i) {
      const Allocation& a = out.served[i];
      if (!a.sla) continue;
      tracker.record_grant(a.flow_id, out.delays[i], k);
      if (!measured) continue;
      ++result.sla_slots;
      if (out.delays[i] > a.sla->latency_target) ++result.delayed_slots;
      auto& sink = (*a.sla == kSlaLowLatency) ? low_delays : standard_delays;
      sink.push_back(out.delays[i].count());
    }
    tracker.recompute_rates(k);
    if (measured) {
      ++result.frames_measured;
      result.retunes += out.retunes;
      result.breach_events += tracker.breached_count();
    }
    if (options.keep_series)
      result.series.push_back({k, tracker.breached_count(),
                               static_cast<std::int64_t>(out.physical_bmap.size()),
                               out.carried_out});
    ++result.frames_simulated;
  }

  result.backlog_at_end = static_cast<std::int64_t>(engine.backlog_size());
  if (checker) {
    checker->finish(engine.backlog_size());
    result.invariants = checker->report();
  }

  const auto opportunities =
      static_cast<double>(result.sla_flows) * static_cast<double>(result.frames_measured);
  if (opportunities > 0)
    result.compliance_pct =
        100.0 * (1.0 - static_cast<double>(result.breach_events) / opportunities);
  if (result.sla_slots > 0)
    result.slot_compliance_pct =
        100.0 * (1.0 - static_cast<double>(result.delayed_slots) /
                           static_cast<double>(result.sla_slots));

  std::vector<std::int64_t> all(low_delays);
  all.insert(all.end(), standard_delays.begin(), standard_delays.end());
  result.sla_delay = summarize(all);
  result.low_latency_delay = summarize(low_delays);
  result.standard_delay = summarize(standard_delays);
  return result;
}

std::uint64_t derive_scenario_seed(std::uint64_t base_seed, const ScenarioConfig& c) {
  std::uint64_t h = mix64(base_seed);
  h = hash_combine(h, static_cast<std::uint64_t>(c.num_channels));
  h = hash_combine(h, static_cast<std::uint64_t>(c.channel_rate.bits_per_second));
  h = hash_combine(h, static_cast<std::uint64_t>(c.tuning_time.count()));
  h = hash_combine(h, per_mille(c.load_fraction));
  h = hash_combine(h, per_mille(c.sla_share));
  return h;
}

SweepPoint make_point(const ScenarioConfig& base, ChannelConfig channels, TimeNs tuning,
                      double load, double sla_share, std::uint64_t base_seed) {
  SweepPoint p{base, base_seed};
  p.config.num_channels = channels.num_channels;
  p.config.channel_rate = LineRate::gbps(channels.rate_gbps);
  p.config.tuning_time = tuning;
  p.config.load_fraction = load;
  p.config.sla_share = sla_share;
  p.config.seed = derive_scenario_seed(base_seed, p.config);
  return p;
}

std::vector<SweepPoint> enumerate(const SweepGrid& grid) {
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (const auto& ch : grid.channel_configs)
    for (const auto tuning : grid.tuning_times)
      for (const double load : grid.loads)
        for (const double share : grid.sla_shares)
          for (const auto seed : grid.seeds)
            points.push_back(make_point(grid.base, ch, tuning, load, share, seed));
  return points;
}

std::vector<ScenarioResult> run_points(const std::vector<SweepPoint>& points, int parallelism,
                                       const RunOptions& options) {
  std::vector<ScenarioResult> results(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = run_scenario(points[i].config, options);
      } catch (const std::exception& e) {
        results[i] = ScenarioResult{};
        results[i].config = points[i].config;
        results[i].error = e.what();
      }
      results[i].base_seed = points[i].base_seed;
    }
  };
  const int threads =
      std::clamp(parallelism, 1, static_cast<int>(std::max<std::size_t>(points.size(), 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

std::vector<ScenarioResult> run_sweep(const SweepGrid& grid, int parallelism,
                                      const RunOptions& options) {
  return run_points(enumerate(grid), parallelism, options);
}

}  // namespace twdm
