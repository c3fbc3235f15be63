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

#ifndef TWDM_MODEL_HPP_
#define TWDM_MODEL_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace twdm {

// All simulation time is integer nanoseconds.
using TimeNs = std::chrono::nanoseconds;
using namespace std::chrono_literals;

// Line rate in bits per second.
struct LineRate {
  std::int64_t bits_per_second = 0;

  static constexpr LineRate gbps(std::int64_t g) { return {g * 1'000'000'000}; }
  constexpr double as_gbps() const { return bits_per_second / 1e9; }
  friend constexpr auto operator<=>(LineRate, LineRate) = default;
  friend constexpr LineRate operator*(std::int64_t k, LineRate r) {
    return {k * r.bits_per_second};
  }
};

inline constexpr TimeNs kFrameDuration = 125'000ns;
inline constexpr TimeNs kGuardTime = 330ns;
inline constexpr int kWindowFrames = 8;
inline constexpr int kNumVnos = 5;
inline constexpr double kMeanBurstFraction = 0.06;
inline constexpr LineRate kBurstReferenceRate = LineRate::gbps(25);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A latency SLA: maximum merging delay plus the fraction of slots that must
// meet it.
struct SlaClass {
  TimeNs latency_target{};
  double compliance_pct = 100.0;

  // Tolerated fraction of delayed slots, in basis points (exact integer form
  // of (100 - compliance_pct) / 100).
  std::int64_t non_compliance_bp() const;
  double non_compliance_threshold() const {
    return static_cast<double>(non_compliance_bp()) / 10'000.0;
  }
  friend bool operator==(const SlaClass&, const SlaClass&) = default;
};

inline const SlaClass kSlaLowLatency{12'500ns, 90.0};
inline const SlaClass kSlaStandard{25'000ns, 95.0};

struct Allocation {
  std::uint64_t alloc_id = 0;
  int vno_id = 0;
  int onu_id = 0;
  int flow_id = 0;
  std::int64_t frame_index = 0;
  // Offset inside the originating frame.
  TimeNs requested_start{};
  std::int64_t payload_bits = 0;
  std::optional<SlaClass> sla;  // empty = best effort
  TimeNs maxtime{};             // frame-relative, see compute_maxtime()

  bool is_best_effort() const { return !sla.has_value(); }
  // Absolute simulation time of the requested start.
  TimeNs absolute_request(TimeNs frame_duration) const {
    return frame_index * frame_duration + requested_start;
  }
};

// Payload transmission time at `rate`, rounded up to the next nanosecond.
// Guard time is not included.
TimeNs duration_on(const Allocation& alloc, LineRate rate);
TimeNs duration_for_bits(std::int64_t payload_bits, LineRate rate);

// Latest scheduled start that does not count as a delayed slot. Best-effort
// allocations have no bound and get `frame_horizon`.
TimeNs compute_maxtime(const Allocation& alloc, TimeNs frame_horizon);

struct VirtualBmap {
  int vno_id = 0;
  std::int64_t frame_index = 0;
  std::vector<Allocation> allocations;  // ordered by requested_start
};

// True when consecutive allocations leave at least `guard` between the end
// of one (at `reference_rate`) and the start of the next.
bool is_collision_free(const VirtualBmap& bmap, LineRate reference_rate,
                       TimeNs guard);

struct PhysicalGrant {
  std::uint64_t alloc_id = 0;
  int channel = 0;
  // Relative to the origin of the allocation's own frame, so the merging
  // delay is scheduled_start - requested_start.
  TimeNs scheduled_start{};
  int transceiver_id = 0;
  int receiver_id = 0;
  bool tuned = false;
};

enum class VirtualTimeline { kSingle, kFullCapacity };
enum class SortMode { kClosestToBreach, kLiteralRateAscending };
enum class WindowMode { kSliding, kTumbling };

struct ScenarioConfig {
  int num_channels = 8;
  LineRate channel_rate = LineRate::gbps(25);
  TimeNs frame_duration = kFrameDuration;
  TimeNs guard_time = kGuardTime;
  TimeNs tuning_time = 0ns;
  int num_vnos = kNumVnos;
  double load_fraction = 0.2;
  double sla_share = 0.5;
  double mean_burst_fraction = kMeanBurstFraction;
  int window_frames = kWindowFrames;
  int onus_per_vno = 2;
  int flows_per_onu = 2;
  int transceivers_per_onu = 1;
  std::int64_t num_frames = 5000;
  std::uint64_t seed = 1;
  // Best-effort maxtime sentinel, in frames.
  int horizon_frames = 2;
  // Fraction of SLA flows assigned to the 12.5 us class; the rest use 25 us.
  double low_latency_class_share = 0.5;
  std::vector<double> vno_weights;  // empty = equal split
  VirtualTimeline timeline = VirtualTimeline::kSingle;
  SortMode sort_mode = SortMode::kClosestToBreach;
  WindowMode window_mode = WindowMode::kSliding;

  LineRate aggregate_rate() const { return num_channels * channel_rate; }
  TimeNs horizon() const { return horizon_frames * frame_duration; }
  // Mean burst payload: mean_burst_fraction of a frame at 25 Gb/s.
  std::int64_t mean_burst_bits() const;
  // Normalized share of VNO `vno` in the offered load.
  double vno_weight(int vno) const;

  // Throws ConfigError describing the first violated constraint.
  void validate() const;
};

std::string to_string(VirtualTimeline t);
std::string to_string(SortMode m);
std::string to_string(WindowMode m);

}  // namespace twdm

#endif  // TWDM_MODEL_HPP_
