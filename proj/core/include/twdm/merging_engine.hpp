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

#ifndef TWDM_MERGING_ENGINE_HPP_
#define TWDM_MERGING_ENGINE_HPP_

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "twdm/free_tables.hpp"
#include "twdm/model.hpp"
#include "twdm/sla_tracker.hpp"

namespace twdm {

struct CollisionSplit {
  std::vector<Allocation> clear;
  std::vector<Allocation> colliding;
};

// Places every allocation at its requested time (interval includes guard)
// and colors the resulting interval graph greedily in start order with
// num_channels colors. Allocations that find no free color collide.
CollisionSplit detect_collisions(std::span<const VirtualBmap> vbmaps,
                                 const ScenarioConfig& config);

// Collision-resolution order. Lower sorts first.
struct SortKey {
  int tier = 0;           // 0 = SLA, 1 = best effort
  double priority = 0.0;  // margin (default) or non-compliance rate (literal)
  TimeNs maxtime{};       // absolute
  std::int64_t payload_bits = 0;
  std::uint64_t alloc_id = 0;

  friend auto operator<=>(const SortKey&, const SortKey&) = default;
};

// `flow` is the allocation's row in the breach table (nullptr for best
// effort or a flow with no history, which then has margin == threshold).
SortKey collision_sort_key(const Allocation& alloc, const FlowState* flow,
                           const ScenarioConfig& config);

enum class FaultInjection { kNone, kForceOverlap };

// Where and how an allocation would be transmitted, before committing it.
struct Placement {
  PhysicalGrant grant;
  TimeNs start{};  // absolute
  TimeNs end{};    // absolute, start + duration + guard
};

// The five assignment steps, without touching the tables:
//   1. earliest-free transceiver of the allocation's ONU,
//   2. earliest-free channel, where a channel (with its receiver) that is
//      idle by the requested start counts as free at the requested start;
//      ties go to the transceiver's current wavelength, then to the lowest
//      index,
//   3. a retune is needed when the transceiver sits on another wavelength,
//   4. start = max(requested start, channel free, receiver free,
//                  transceiver free + tuning time if retuning),
//   5. see commit().
// `not_before` (absolute) additionally bounds the start from below.
Placement plan(const Allocation& alloc, const FreeTimeTables& tables,
               const ScenarioConfig& config, TimeNs not_before = TimeNs{});

// Step 5: channel, receiver and transceiver become free at start + duration
// + guard; the transceiver now sits on the chosen wavelength.
void commit(const Placement& placement, const Allocation& alloc, FreeTimeTables& tables);

// plan() followed by commit(). Never fails: grants are delayed, not dropped.
PhysicalGrant assign(const Allocation& alloc, FreeTimeTables& tables,
                     const ScenarioConfig& config, TimeNs not_before = TimeNs{});

struct MergeOutcome {
  std::int64_t frame_index = 0;
  std::vector<PhysicalGrant> physical_bmap;
  std::vector<Allocation> served;  // served[i] is the allocation of physical_bmap[i]
  std::vector<TimeNs> delays;      // merging delay of physical_bmap[i]
  std::int64_t colliding = 0;      // new allocations flagged by detect_collisions
  std::int64_t retunes = 0;
  std::int64_t past_maxtime = 0;  // SLA grants scheduled after their maxtime
  std::int64_t carried_in = 0;    // backlog entering this merge
  std::int64_t carried_out = 0;   // backlog leaving it
};

// The stateful frame-by-frame merger.
//
// Allocations are traversed in time: whenever a channel frees up, every
// allocation whose requested start has passed competes for it. Clear
// allocations (see detect_collisions) beat colliding and backlogged ones,
// and within each group the smallest collision_sort_key wins. An allocation
// with no competitor is therefore placed at its requested start, and the
// colliding ones are served in key order around the clear ones.
//
// Free-time tables persist across frames: a burst that runs past the frame
// boundary keeps its channel busy and transceivers remember their
// wavelength. Grants must start inside the frame being merged; allocations
// that cannot are carried, unchanged, into the next merge.
class MergingEngine {
 public:
  explicit MergingEngine(const ScenarioConfig& config);

  // Merges all vBMaps of one frame; frames must arrive in increasing order.
  MergeOutcome merge_frame(std::span<const VirtualBmap> vbmaps, const SlaTracker& flows);

  const FreeTimeTables& tables() const { return tables_; }
  std::size_t backlog_size() const { return backlog_count_; }
  void set_fault_injection(FaultInjection f) { fault_ = f; }

 private:
  struct Pending {
    Allocation alloc;
    bool granted = false;
  };
  using FlowQueue = std::deque<Pending>;

  void enqueue(const Allocation& alloc);
  void record(MergeOutcome& out, const Allocation& alloc, const Placement& p);

  ScenarioConfig config_;
  FreeTimeTables tables_;
  std::vector<FlowQueue> backlog_;  // by flow id, sorted by maxtime, size, id
  std::size_t backlog_count_ = 0;
  std::int64_t next_frame_ = 0;
  bool started_ = false;
  FaultInjection fault_ = FaultInjection::kNone;
};

}  // namespace twdm

#endif  // TWDM_MERGING_ENGINE_HPP_
