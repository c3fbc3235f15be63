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

#include <vector>

#include "brute_force.hpp"
#include "doctest.h"
#include "twdm/exact_oracle.hpp"

using namespace twdm;

namespace {

DiscreteAllocation unit(int slot, int maxtime, int flow, std::int64_t bp = 0) {
  return DiscreteAllocation{slot, 1, maxtime, flow, bp};
}

}  // namespace

TEST_SUITE("exact-oracle") {

TEST_CASE("objective of hand-built assignments") {
  DiscreteInstance inst(2, 4, {{unit(0, 0, 0), unit(1, 1, 1)}});
  CHECK(objective(inst, {{0, 0}, {0, 1}}) == OracleObjective{0, 0});
  CHECK(objective(inst, {{0, 0}, {1, 2}}) == OracleObjective{1, 1});
  CHECK_THROWS_AS(objective(inst, {{0, 0}, {0, 0}}), Infeasible);  // 2 allocations in one cell
  CHECK_THROWS_AS(objective(inst, {{0, 1}, {1, 0}}), Infeasible);  // starts early
  CHECK_THROWS_AS(objective(inst, {{0, 0}}), std::exception);
}

TEST_CASE("flow breach needs the packet share above the threshold") {
  // One flow, 4 packets, 25% tolerated: one late packet is fine, two are not.
  DiscreteInstance inst(1, 8, {{unit(0, 0, 7, 2'500), unit(1, 1, 7, 2'500), unit(2, 2, 7, 2'500),
                                unit(3, 3, 7, 2'500)}});
  CHECK(objective(inst, {{0, 0}, {0, 1}, {0, 2}, {0, 4}}) == OracleObjective{0, 1});
  CHECK(objective(inst, {{0, 0}, {0, 1}, {0, 5}, {0, 4}}) == OracleObjective{1, 2});
}

TEST_CASE("assignment matrix") {
  DiscreteInstance inst(2, 4, {{unit(0, 0, 0)}, {unit(0, 1, 1), DiscreteAllocation{1, 2, 3, 2, 0}}});
  const std::vector<SlotAssignment> ok{{0, 0}, {1, 0}, {0, 1}};
  AssignmentMatrix x(inst, ok);
  CHECK(x.at(0, 0, 0, 0));
  CHECK(x.at(1, 0, 1, 0));
  CHECK(x.at(1, 1, 0, 1));
  CHECK_FALSE(x.at(1, 1, 0, 2));  // only the start cell is set
  CHECK(x.satisfies_constraints());
  AssignmentMatrix clash(inst, {{0, 0}, {0, 1}, {0, 1}});
  CHECK_FALSE(clash.satisfies_constraints());
  CHECK(inst.position(2) == std::pair{1, 1});
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(DiscreteInstance(1, 2, {{unit(0, 0, 0), unit(0, 0, 1), unit(0, 0, 2)}}),
                  Infeasible);
  CHECK_THROWS_AS(DiscreteInstance(1, 4, {{unit(2, 1, 0)}}), ConfigError);
  CHECK_THROWS_AS(DiscreteInstance(1, 4, {{DiscreteAllocation{3, 2, 3, 0, 0}}}), ConfigError);
  CHECK_THROWS_AS(DiscreteInstance(1, 4, {{unit(0, 0, 0, 0), unit(1, 1, 0, 500)}}), ConfigError);
  DiscreteInstance wide(4, 4, {{unit(0, 0, 0)}});
  CHECK_THROWS_AS(solve_exact(wide), InstanceTooLarge);
}

TEST_CASE("single allocation sits at its request") {
  DiscreteInstance inst(1, 4, {{unit(0, 0, 0)}});
  const auto s = solve_exact(inst);
  CHECK(s.assignment == std::vector<SlotAssignment>{{0, 0}});
  CHECK(s.value == OracleObjective{0, 0});
}

TEST_CASE("two same-slot allocations use both channels") {
  DiscreteInstance inst(2, 4, {{unit(1, 1, 0)}, {unit(1, 1, 1)}});
  const auto s = solve_exact(inst);
  CHECK(s.value == OracleObjective{0, 0});
  CHECK(s.assignment[0].start == 1);
  CHECK(s.assignment[1].start == 1);
  CHECK(s.assignment[0].channel != s.assignment[1].channel);
}

TEST_CASE("three same-slot allocations on two channels: one must slip") {
  DiscreteInstance inst(2, 4, {{unit(0, 0, 0)}, {unit(0, 0, 1)}, {unit(0, 0, 2)}});
  CHECK(solve_exact(inst).value == OracleObjective{1, 1});
}

TEST_CASE("five same-slot allocations on one channel: three breach") {
  std::vector<std::vector<DiscreteAllocation>> maps;
  for (int i = 0; i < 5; ++i) maps.push_back({unit(2, 3, i)});
  DiscreteInstance inst(1, 8, maps);
  CHECK(solve_exact(inst).value.flow_breaches == 3);
}

TEST_CASE("frozen optimum of a fixed random instance") {
  const auto inst = random_instance(2026, {3, 16, 8, 8, 3});
  const auto s = solve_exact(inst);
  CHECK(s.value == OracleObjective{0, 1});
  CHECK(objective(inst, s.assignment) == s.value);
}

TEST_CASE("branch and bound matches exhaustive enumeration up to 4 allocations") {
  const InstanceShape shape{3, 8, 1, 4, 3};
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const auto inst = random_instance(seed, shape);
    const auto exact = solve_exact(inst);
    const auto brute = testing::brute_force(inst);
    REQUIRE(brute.has_value());
    CHECK_MESSAGE(exact.value == brute->value, "seed " << seed);
    CHECK_MESSAGE(exact.assignment == brute->assignment, "seed " << seed);
  }
}

TEST_CASE("slot conversion") {
  DiscreteInstance inst(2, 6, {{DiscreteAllocation{1, 2, 2, 0, 1'000}}, {unit(3, 4, 1)}});
  ScenarioConfig base;
  const auto conv = to_continuous(inst, base);
  CHECK(conv.slot_width == 7'830ns);
  CHECK(conv.config.num_channels == 2);
  CHECK(conv.config.tuning_time == 0ns);
  REQUIRE(conv.vbmaps.size() == 2);
  const auto& a = conv.vbmaps[0].allocations.at(0);
  CHECK(a.requested_start == 7'830ns);
  CHECK(a.payload_bits == (2 * 7'830 - 330) * 25);
  CHECK(duration_on(a, LineRate::gbps(25)) + kGuardTime == 2 * 7'830ns);
  REQUIRE(a.sla.has_value());
  CHECK(a.sla->latency_target == 7'830ns);
  CHECK(a.sla->non_compliance_bp() == 1'000);
  CHECK(conv.vbmaps[1].allocations.at(0).onu_id != a.onu_id);
}

TEST_CASE("the heuristic never beats the optimum") {
  DiscreteInstance three(2, 4, {{unit(0, 0, 0)}, {unit(0, 0, 1)}, {unit(0, 0, 2)}});
  CHECK(heuristic_gap(three, ScenarioConfig{}).zero_gap());

  int zero = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto inst = random_instance(seed, {3, 12, 6, 6, 3});
    const auto gap = heuristic_gap(inst, ScenarioConfig{});
    CHECK(gap.heuristic >= gap.exact);
    CHECK(objective(inst, gap.heuristic_assignment) == gap.heuristic);
    zero += gap.zero_gap();
  }
  CHECK(zero >= 50);
}

TEST_CASE("random instances respect the shape") {
  const InstanceShape shape{3, 12, 3, 6, 3};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = random_instance(seed, shape);
    CHECK(inst.num_channels() <= 3);
    CHECK(inst.num_slots() == 12);
    CHECK(inst.size() >= 3);
    CHECK(inst.size() <= 6);
    int total = 0, latest = 0;
    for (const auto& a : inst.flat()) {
      total += a.length;
      latest = std::max(latest, a.requested_slot);
    }
    CHECK(latest + total <= inst.num_slots());
  }
}

}
