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

#include "twdm/model.hpp"

#include <cmath>
#include <numeric>

namespace twdm {
namespace {
__extension__ typedef __int128 wide_int;
}

std::int64_t SlaClass::non_compliance_bp() const {
  return std::llround((100.0 - compliance_pct) * 100.0);
}

TimeNs duration_for_bits(std::int64_t payload_bits, LineRate rate) {
  // ceil(bits * 1e9 / rate) without overflow for any frame-sized payload.
  const wide_int num = static_cast<wide_int>(payload_bits) * 1'000'000'000;
  const wide_int den = rate.bits_per_second;
  return TimeNs{static_cast<std::int64_t>((num + den - 1) / den)};
}

TimeNs duration_on(const Allocation& alloc, LineRate rate) {
  return duration_for_bits(alloc.payload_bits, rate);
}

TimeNs compute_maxtime(const Allocation& alloc, TimeNs frame_horizon) {
  if (alloc.sla) return alloc.requested_start + alloc.sla->latency_target;
  return frame_horizon;
}

bool is_collision_free(const VirtualBmap& bmap, LineRate reference_rate,
                       TimeNs guard) {
  const auto& allocs = bmap.allocations;
  for (std::size_t i = 1; i < allocs.size(); ++i) {
    const auto& prev = allocs[i - 1];
    if (allocs[i].requested_start <
        prev.requested_start + duration_on(prev, reference_rate) + guard) {
      return false;
    }
  }
  return true;
}

std::int64_t ScenarioConfig::mean_burst_bits() const {
  const double bits = mean_burst_fraction *
                      static_cast<double>(frame_duration.count()) * 1e-9 *
                      static_cast<double>(kBurstReferenceRate.bits_per_second);
  return std::llround(bits);
}

double ScenarioConfig::vno_weight(int vno) const {
  if (vno_weights.empty()) return 1.0 / num_vnos;
  const double total =
      std::accumulate(vno_weights.begin(), vno_weights.end(), 0.0);
  return vno_weights[static_cast<std::size_t>(vno)] / total;
}

void ScenarioConfig::validate() const {
  if (num_channels < 1) throw ConfigError("num_channels must be >= 1");
  if (channel_rate.bits_per_second <= 0)
    throw ConfigError("channel_rate must be positive");
  if (frame_duration <= 0ns) throw ConfigError("frame_duration must be positive");
  if (guard_time < 0ns) throw ConfigError("guard_time must be non-negative");
  if (tuning_time < 0ns) throw ConfigError("tuning_time must be non-negative");
  if (num_vnos < 1) throw ConfigError("num_vnos must be >= 1");
  if (!(load_fraction > 0.0)) throw ConfigError("load must be positive");
  if (load_fraction > 1.0) throw ConfigError("load exceeds capacity");
  if (!(sla_share >= 0.0 && sla_share <= 1.0))
    throw ConfigError("sla_share must lie in [0, 1]");
  if (!(low_latency_class_share >= 0.0 && low_latency_class_share <= 1.0))
    throw ConfigError("low_latency_class_share must lie in [0, 1]");
  if (!(mean_burst_fraction > 0.0))
    throw ConfigError("mean_burst_fraction must be positive");
  if (window_frames < 1) throw ConfigError("window_frames must be >= 1");
  if (onus_per_vno < 1) throw ConfigError("onus_per_vno must be >= 1");
  if (flows_per_onu < 1) throw ConfigError("flows_per_onu must be >= 1");
  if (transceivers_per_onu < 1)
    throw ConfigError("transceivers_per_onu must be >= 1");
  if (num_frames < 0) throw ConfigError("num_frames must be non-negative");
  if (horizon_frames < 1) throw ConfigError("horizon_frames must be >= 1");
  if (!vno_weights.empty()) {
    if (static_cast<int>(vno_weights.size()) != num_vnos)
      throw ConfigError("vno_weights must have one entry per VNO");
    for (double w : vno_weights)
      if (!(w > 0.0)) throw ConfigError("vno_weights must be positive");
  }
  const auto max_burst = static_cast<std::int64_t>(
      std::ceil(1.5 * static_cast<double>(mean_burst_bits())));
  if (duration_for_bits(max_burst, channel_rate) > frame_duration)
    throw ConfigError("burst does not fit in one frame at the channel rate");
}

std::string to_string(VirtualTimeline t) {
  return t == VirtualTimeline::kSingle ? "single" : "full-capacity";
}

std::string to_string(SortMode m) {
  return m == SortMode::kClosestToBreach ? "closest-to-breach"
                                         : "literal-rate-ascending";
}

std::string to_string(WindowMode m) {
  return m == WindowMode::kSliding ? "sliding" : "tumbling";
}

}  // namespace twdm
