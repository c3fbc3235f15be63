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

#include "doctest.h"
#include "twdm/rng.hpp"
#include "twdm/sla_tracker.hpp"

using namespace twdm;

namespace {

// Brute-force window count straight from the raw grant list.
struct Grant {
  std::int64_t frame;
  TimeNs delay;
};

std::pair<std::int64_t, std::int64_t> recount(const std::vector<Grant>& grants,
                                              const SlaClass& sla, std::int64_t now,
                                              int window) {
  std::int64_t delayed = 0, total = 0;
  for (const auto& g : grants) {
    if (g.frame > now - window && g.frame <= now) {
      ++total;
      if (g.delay > sla.latency_target) ++delayed;
    }
  }
  return {delayed, total};
}

}  // namespace

TEST_SUITE("sla-tracker") {

TEST_CASE("delayed slot counting") {
  FlowState f(0, kSlaStandard);
  f.record_grant(30'000ns, 0);
  f.recompute(0);
  CHECK(f.window_delayed() == 1);
  CHECK(f.window_total() == 1);

  FlowState g(0, kSlaStandard);
  g.record_grant(0ns, 0);
  g.recompute(0);
  CHECK(g.window_delayed() == 0);
  CHECK(g.window_total() == 1);

  FlowState h(0, kSlaLowLatency);
  h.record_grant(12'500ns, 0);
  h.recompute(0);
  CHECK(h.window_delayed() == 0);
  h.record_grant(12'501ns, 0);
  h.recompute(0);
  CHECK(h.window_delayed() == 1);
}

TEST_CASE("rates and margins") {
  FlowState clean(0, kSlaStandard);
  for (int i = 0; i < 50; ++i) clean.record_grant(0ns, 3);
  clean.recompute(3);
  CHECK(clean.non_compliance_rate() == 0.0);
  CHECK(clean.margin() == doctest::Approx(0.05));

  FlowState two95(1, kSlaStandard);
  FlowState two99(2, SlaClass{25'000ns, 99.0});
  for (int i = 0; i < 100; ++i) {
    const TimeNs d = i < 2 ? 40'000ns : 0ns;
    two95.record_grant(d, 0);
    two99.record_grant(d, 0);
  }
  two95.recompute(0);
  two99.recompute(0);
  CHECK(two95.non_compliance_rate() == doctest::Approx(0.02));
  CHECK_FALSE(two95.is_breached());
  CHECK(two99.is_breached());
}

TEST_CASE("breach is strictly above the threshold") {
  FlowState at(0, kSlaStandard);  // 5%
  for (int i = 0; i < 100; ++i) at.record_grant(i < 5 ? 30'000ns : 0ns, 0);
  at.recompute(0);
  CHECK_FALSE(at.is_breached());

  FlowState above(0, kSlaStandard);
  for (int i = 0; i < 100; ++i) above.record_grant(i < 6 ? 30'000ns : 0ns, 0);
  above.recompute(0);
  CHECK(above.is_breached());

  FlowState empty(0, kSlaStandard);
  empty.recompute(10);
  CHECK_FALSE(empty.is_breached());
}

TEST_CASE("sliding window forgets frames older than 8") {
  FlowState f(0, kSlaLowLatency);
  f.record_grant(20'000ns, 0);
  for (std::int64_t t = 0; t < 8; ++t) {
    f.recompute(t);
    CHECK(f.window_delayed() == 1);
  }
  f.recompute(8);
  CHECK(f.window_delayed() == 0);
  CHECK(f.window_total() == 0);
}

TEST_CASE("tumbling window restarts on window boundaries") {
  FlowState f(0, kSlaLowLatency, 8, WindowMode::kTumbling);
  f.record_grant(20'000ns, 6);
  f.recompute(7);
  CHECK(f.window_delayed() == 1);
  f.recompute(8);
  CHECK(f.window_delayed() == 0);
}

TEST_CASE("tracker ignores best-effort and unknown flows") {
  std::vector<FlowProfile> flows(3);
  for (int i = 0; i < 3; ++i) flows[i].flow_id = i;
  flows[1].sla = kSlaStandard;
  SlaTracker t(flows, 8);
  CHECK(t.sla_flow_count() == 1);
  CHECK(t.state(0) == nullptr);
  CHECK(t.state(1) != nullptr);
  CHECK(t.state(7) == nullptr);
  t.record_grant(0, 99'000ns, 0);
  t.record_grant(7, 99'000ns, 0);
  t.record_grant(1, 99'000ns, 0);
  t.recompute_rates(0);
  CHECK(t.breached_count() == 1);
}

TEST_CASE("tracker equals a brute-force recount on 1000 random grant streams") {
  for (std::uint64_t stream = 0; stream < 1000; ++stream) {
    RngStream rng(stream);
    const SlaClass sla = stream % 2 ? kSlaLowLatency : kSlaStandard;
    FlowState state(0, sla);
    std::vector<Grant> grants;
    const auto frames = rng.uniform_int(1, 40);
    bool same = true;
    for (std::int64_t f = 0; f < frames && same; ++f) {
      const auto n = rng.uniform_int(0, 6);
      for (std::int64_t k = 0; k < n; ++k) {
        // Delays cluster around the targets to exercise the boundary.
        const TimeNs d{rng.uniform_int(0, 3) == 0 ? sla.latency_target.count()
                                                  : rng.uniform_int(0, 40'000)};
        grants.push_back({f, d});
        state.record_grant(d, f);
      }
      state.recompute(f);
      const auto [delayed, total] = recount(grants, sla, f, kWindowFrames);
      same = state.window_delayed() == delayed && state.window_total() == total;
      const bool breached = delayed * 10'000 > total * sla.non_compliance_bp();
      same = same && state.is_breached() == breached;
    }
    REQUIRE_MESSAGE(same, "stream " << stream);
  }
}

}
