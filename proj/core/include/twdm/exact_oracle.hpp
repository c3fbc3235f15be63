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

// Exact reference scheduler on small slotted instances.
//
// Time is cut into slots of a fixed width and every allocation occupies a
// whole number of slots. An assignment gives each allocation one (channel,
// start slot) pair; no two allocations may share a channel in the same slot
// and no allocation may start before its requested slot. Allocations that
// start after their maxtime slot are packet breaches; a flow breaches when
// its share of packet breaches exceeds its threshold.

#ifndef TWDM_EXACT_ORACLE_HPP_
#define TWDM_EXACT_ORACLE_HPP_

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "twdm/model.hpp"

namespace twdm {

inline constexpr int kOracleMaxChannels = 3;
inline constexpr int kOracleMaxSlots = 16;
inline constexpr int kOracleMaxAllocations = 8;

struct DiscreteAllocation {
  int requested_slot = 0;
  int length = 1;  // slots
  int maxtime_slot = 0;
  int flow_id = 0;
  std::int64_t threshold_bp = 0;  // tolerated breach fraction, basis points
};

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DiscreteInstance {
 public:
  // Throws ConfigError on malformed allocations and Infeasible when the
  // allocations cannot fit into num_channels * num_slots.
  DiscreteInstance(int num_channels, int num_slots,
                   std::vector<std::vector<DiscreteAllocation>> vbmaps);

  int num_channels() const { return num_channels_; }
  int num_slots() const { return num_slots_; }
  const std::vector<std::vector<DiscreteAllocation>>& vbmaps() const { return vbmaps_; }

  // vBMap-major flattening, the order used by SlotAssignment vectors.
  const std::vector<DiscreteAllocation>& flat() const { return flat_; }
  std::size_t size() const { return flat_.size(); }
  std::pair<int, int> position(std::size_t flat_index) const;  // (v, a)

 private:
  int num_channels_;
  int num_slots_;
  std::vector<std::vector<DiscreteAllocation>> vbmaps_;
  std::vector<DiscreteAllocation> flat_;
};

struct SlotAssignment {
  int channel = 0;
  int start = 0;
  friend auto operator<=>(const SlotAssignment&, const SlotAssignment&) = default;
};

// X[v][a][c][t] = 1 iff allocation a of vBMap v starts on channel c at slot t.
class AssignmentMatrix {
 public:
  AssignmentMatrix(const DiscreteInstance& instance, const std::vector<SlotAssignment>& starts);

  bool at(int v, int a, int c, int t) const;
  // Each allocation has exactly one start pair and no (c, t) cell is covered
  // by more than one allocation.
  bool satisfies_constraints() const;

 private:
  const DiscreteInstance* instance_;
  std::vector<std::vector<std::vector<std::uint8_t>>> x_;  // [v][a][c*T+t]
};

// Flow breaches first, packet breaches as tie-break.
struct OracleObjective {
  int flow_breaches = 0;
  int packet_breaches = 0;
  friend auto operator<=>(const OracleObjective&, const OracleObjective&) = default;
};

// Throws Infeasible for assignments that overlap, start early or run past
// the last slot.
OracleObjective objective(const DiscreteInstance& instance,
                          const std::vector<SlotAssignment>& assignment);

struct ExactSolution {
  std::vector<SlotAssignment> assignment;  // lexicographically smallest optimum
  OracleObjective value;
  std::int64_t nodes = 0;                  // search tree size
};

// Branch and bound over all assignments. Throws InstanceTooLarge above the
// size limits and Infeasible when no valid assignment exists.
ExactSolution solve_exact(const DiscreteInstance& instance);

// Continuous-time rendering of a slotted instance: one slot is one mean
// burst plus guard at the channel rate, and an allocation of length L has
// exactly L slots of transmission time including its guard.
struct SlotConversion {
  TimeNs slot_width{};
  ScenarioConfig config;
  std::vector<VirtualBmap> vbmaps;
};
SlotConversion to_continuous(const DiscreteInstance& instance, const ScenarioConfig& base);

class ConversionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GapResult {
  OracleObjective heuristic;
  OracleObjective exact;
  std::vector<SlotAssignment> heuristic_assignment;
  bool zero_gap() const { return heuristic == exact; }
};

// Runs one merge of the converted instance (tuning forced to zero) and the
// exact solver, and compares the two objectives.
GapResult heuristic_gap(const DiscreteInstance& instance, const ScenarioConfig& base);

struct InstanceShape {
  int max_channels = 3;
  int max_slots = 12;
  int min_allocations = 3;
  int max_allocations = 6;
  int max_vbmaps = 3;
};

// Random instance whose allocations always fit into the slot range even
// when they all queue on one channel behind the latest request.
DiscreteInstance random_instance(std::uint64_t seed, const InstanceShape& shape = {});

}  // namespace twdm

#endif  // TWDM_EXACT_ORACLE_HPP_
