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

#include "twdm/invariants.hpp"

#include <algorithm>

namespace twdm {
namespace {
constexpr std::size_t kMaxMessages = 16;
}

namespace detail {

bool IntervalSet::is_free(TimeNs start, TimeNs end) const {
  auto next = spans_.lower_bound(start);
  if (next != spans_.end() && next->first < end) return false;
  if (next != spans_.begin() && std::prev(next)->second > start) return false;
  return true;
}

void IntervalSet::prune_before(TimeNs t) {
  // Spans are disjoint, so ends are sorted like starts.
  auto it = spans_.begin();
  while (it != spans_.end() && it->second <= t) it = spans_.erase(it);
}

}  // namespace detail

void InvariantReport::merge(const InvariantReport& o) {
  frames_checked += o.frames_checked;
  grants_checked += o.grants_checked;
  channel_overlaps += o.channel_overlaps;
  receiver_overlaps += o.receiver_overlaps;
  transceiver_overlaps += o.transceiver_overlaps;
  tuning_gap_violations += o.tuning_gap_violations;
  negative_delays += o.negative_delays;
  duplicate_grants += o.duplicate_grants;
  conservation_errors += o.conservation_errors;
  for (const auto& m : o.messages)
    if (messages.size() < kMaxMessages) messages.push_back(m);
}

InvariantChecker::InvariantChecker(const ScenarioConfig& config)
    : config_(config),
      channels_(static_cast<std::size_t>(config.num_channels)),
      receivers_(static_cast<std::size_t>(config.num_channels)) {}

void InvariantChecker::fail(std::int64_t& counter, std::string message) {
  ++counter;
  if (report_.messages.size() < kMaxMessages) report_.messages.push_back(std::move(message));
}

void InvariantChecker::observe_inputs(std::span<const VirtualBmap> vbmaps) {
  for (const auto& b : vbmaps)
    for (const auto& a : b.allocations)
      if (!outstanding_.insert(a.alloc_id).second)
        fail(report_.duplicate_grants, "duplicate allocation id " + std::to_string(a.alloc_id));
}

void InvariantChecker::observe(const MergeOutcome& outcome) {
  const TimeNs frame_start = outcome.frame_index * config_.frame_duration;
  const TimeNs tuning = config_.tuning_time;
  for (auto& c : channels_) c.prune_before(frame_start);
  for (auto& r : receivers_) r.prune_before(frame_start);
  for (auto& t : transceivers_)
    std::erase_if(t, [&](const Burst& b) { return b.end + tuning <= frame_start; });

  ++report_.frames_checked;
  const auto frame = std::to_string(outcome.frame_index);
  for (std::size_t i = 0; i < outcome.physical_bmap.size(); ++i) {
    const auto& g = outcome.physical_bmap[i];
    const auto& a = outcome.served[i];
    ++report_.grants_checked;

    if (outcome.served[i].alloc_id != g.alloc_id || outstanding_.erase(g.alloc_id) == 0)
      fail(report_.duplicate_grants,
           "frame " + frame + ": grant for unknown or already granted allocation " +
               std::to_string(g.alloc_id));
    if (g.scheduled_start < a.requested_start || outcome.delays[i] < 0ns)
      fail(report_.negative_delays,
           "frame " + frame + ": negative delay for allocation " + std::to_string(g.alloc_id));

    const TimeNs start = a.frame_index * config_.frame_duration + g.scheduled_start;
    const TimeNs end = start + duration_on(a, config_.channel_rate) + config_.guard_time;
    if (g.channel < 0 || g.channel >= config_.num_channels) {
      fail(report_.channel_overlaps, "frame " + frame + ": channel index out of range");
      continue;
    }
    auto& chan = channels_[static_cast<std::size_t>(g.channel)];
    if (!chan.is_free(start, end))
      fail(report_.channel_overlaps, "frame " + frame + ": channel exclusivity violated on channel " +
                                         std::to_string(g.channel));
    chan.insert(start, end);
    auto& rx = receivers_[static_cast<std::size_t>(g.channel)];
    if (!rx.is_free(start, end))
      fail(report_.receiver_overlaps,
           "frame " + frame + ": receiver exclusivity violated on channel " +
               std::to_string(g.channel));
    rx.insert(start, end);

    if (g.transceiver_id < 0 ||
        g.transceiver_id / config_.transceivers_per_onu != a.onu_id) {
      fail(report_.transceiver_overlaps, "frame " + frame + ": transceiver does not belong to the ONU");
      continue;
    }
    if (static_cast<std::size_t>(g.transceiver_id) >= transceivers_.size())
      transceivers_.resize(static_cast<std::size_t>(g.transceiver_id) + 1);
    auto& bursts = transceivers_[static_cast<std::size_t>(g.transceiver_id)];
    for (const auto& b : bursts) {
      if (start < b.end && b.start < end) {
        fail(report_.transceiver_overlaps,
             "frame " + frame + ": transceiver " + std::to_string(g.transceiver_id) +
                 " double-booked");
      } else if (b.channel != g.channel && start < b.end + tuning && b.start < end + tuning) {
        fail(report_.tuning_gap_violations,
             "frame " + frame + ": transceiver " + std::to_string(g.transceiver_id) +
                 " retuned faster than the tuning time");
      }
    }
    bursts.push_back({start, end, g.channel});
  }
}

void InvariantChecker::finish(std::size_t backlog) {
  if (outstanding_.size() != backlog)
    fail(report_.conservation_errors,
         "conservation violated: " + std::to_string(outstanding_.size()) +
             " allocations unaccounted for, engine backlog " + std::to_string(backlog));
}

}  // namespace twdm
