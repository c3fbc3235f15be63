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

#ifndef TWDM_SIM_RUNNER_HPP_
#define TWDM_SIM_RUNNER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twdm/invariants.hpp"
#include "twdm/merging_engine.hpp"
#include "twdm/model.hpp"

namespace twdm {

struct DelayStats {
  std::int64_t count = 0;
  double mean_ns = 0.0;
  std::int64_t p99_ns = 0;
  std::int64_t max_ns = 0;
};

struct FrameSample {
  std::int64_t frame_index = 0;
  int breached_flows = 0;
  std::int64_t grants = 0;
  std::int64_t backlog = 0;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::uint64_t base_seed = 0;  // seed before per-scenario derivation
  std::int64_t frames_simulated = 0;
  std::int64_t frames_measured = 0;  // after warm-up
  int sla_flows = 0;
  // One event per (SLA flow, measured frame) whose window is in breach.
  std::int64_t breach_events = 0;
  double compliance_pct = 100.0;
  // Slot-level view: fraction of measured SLA grants within target.
  std::int64_t sla_slots = 0;
  std::int64_t delayed_slots = 0;
  double slot_compliance_pct = 100.0;
  DelayStats sla_delay;
  DelayStats low_latency_delay;
  DelayStats standard_delay;
  std::int64_t retunes = 0;
  std::int64_t backlog_at_end = 0;
  std::optional<InvariantReport> invariants;
  std::vector<FrameSample> series;
  std::string error;  // non-empty when the scenario failed

  bool ok() const { return error.empty(); }
};

struct RunOptions {
  bool check_invariants = false;
  bool keep_series = false;
  FaultInjection fault = FaultInjection::kNone;
};

// generate_frame -> merge_frame -> record grants -> recompute rates, for
// config.num_frames frames. The first window_frames frames warm the tables
// up and are excluded from breach and delay statistics. Throws ConfigError
// on invalid or infeasible configurations.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct ChannelConfig {
  int num_channels = 1;
  std::int64_t rate_gbps = 200;
  friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

struct SweepGrid {
  std::vector<ChannelConfig> channel_configs{{8, 25}, {4, 50}, {1, 200}};
  std::vector<TimeNs> tuning_times{0ns, 250ns, 1'000ns, 15'000ns};
  std::vector<double> loads{0.2, 0.5, 0.8};
  std::vector<double> sla_shares{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::uint64_t> seeds{1};
  ScenarioConfig base;  // everything the grid does not vary

  std::size_t size() const {
    return channel_configs.size() * tuning_times.size() * loads.size() * sla_shares.size() *
           seeds.size();
  }
};

// Seed of one grid point: a hash of the base seed and the point's
// coordinates, so adding points never perturbs existing ones.
std::uint64_t derive_scenario_seed(std::uint64_t base_seed, const ScenarioConfig& config);

// A grid point with its derived seed; base_seed is what reports show.
struct SweepPoint {
  ScenarioConfig config;
  std::uint64_t base_seed = 0;
};

// Configures one point: copies `base`, applies the coordinates, derives the
// seed.
SweepPoint make_point(const ScenarioConfig& base, ChannelConfig channels, TimeNs tuning,
                      double load, double sla_share, std::uint64_t base_seed);

// Cartesian product in declaration order: channel configs outermost, then
// tuning times, loads, SLA shares, seeds.
std::vector<SweepPoint> enumerate(const SweepGrid& grid);

// Runs points on up to `parallelism` worker threads. Output order follows
// input order. Failures are captured per point in ScenarioResult::error.
std::vector<ScenarioResult> run_points(const std::vector<SweepPoint>& points, int parallelism,
                                       const RunOptions& options = {});
std::vector<ScenarioResult> run_sweep(const SweepGrid& grid, int parallelism,
                                      const RunOptions& options = {});

}  // namespace twdm

#endif  // TWDM_SIM_RUNNER_HPP_
