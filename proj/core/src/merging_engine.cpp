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

#include "twdm/merging_engine.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace twdm {
namespace {

TimeNs burst_length(const Allocation& a, const ScenarioConfig& config) {
  return duration_on(a, config.channel_rate) + config.guard_time;
}

bool queue_order(const Allocation& x, const Allocation& y, TimeNs frame) {
  const TimeNs mx = x.frame_index * frame + x.maxtime;
  const TimeNs my = y.frame_index * frame + y.maxtime;
  if (mx != my) return mx < my;
  if (x.payload_bits != y.payload_bits) return x.payload_bits < y.payload_bits;
  return x.alloc_id < y.alloc_id;
}

}  // namespace

CollisionSplit detect_collisions(std::span<const VirtualBmap> vbmaps,
                                 const ScenarioConfig& config) {
  std::vector<Allocation> all;
  for (const auto& b : vbmaps) all.insert(all.end(), b.allocations.begin(), b.allocations.end());
  std::sort(all.begin(), all.end(), [](const Allocation& x, const Allocation& y) {
    if (x.requested_start != y.requested_start) return x.requested_start < y.requested_start;
    return x.alloc_id < y.alloc_id;
  });

  CollisionSplit split;
  std::vector<TimeNs> lane_end(static_cast<std::size_t>(config.num_channels), TimeNs::min());
  for (const auto& a : all) {
    auto lane = std::find_if(lane_end.begin(), lane_end.end(),
                             [&](TimeNs end) { return end <= a.requested_start; });
    if (lane == lane_end.end()) {
      split.colliding.push_back(a);
    } else {
      *lane = a.requested_start + burst_length(a, config);
      split.clear.push_back(a);
    }
  }
  return split;
}

SortKey collision_sort_key(const Allocation& alloc, const FlowState* flow,
                           const ScenarioConfig& config) {
  SortKey k;
  k.maxtime = alloc.frame_index * config.frame_duration + alloc.maxtime;
  k.payload_bits = alloc.payload_bits;
  k.alloc_id = alloc.alloc_id;
  if (alloc.is_best_effort()) {
    k.tier = 1;
    return k;
  }
  if (config.sort_mode == SortMode::kClosestToBreach) {
    k.priority = flow ? flow->margin() : alloc.sla->non_compliance_threshold();
  } else {
    k.priority = flow ? flow->non_compliance_rate() : 0.0;
  }
  return k;
}

Placement plan(const Allocation& alloc, const FreeTimeTables& tables,
               const ScenarioConfig& config, TimeNs not_before) {
  const TimeNs requested =
      std::max(alloc.absolute_request(config.frame_duration), not_before);
  const TimeNs length = burst_length(alloc, config);

  // Transceivers are looked up read-only; an ONU never seen before has all
  // of its transceivers idle and untuned.
  auto all = tables.transceivers.all();
  const auto per_onu = static_cast<std::size_t>(tables.transceivers.per_onu());
  const auto first = static_cast<std::size_t>(alloc.onu_id) * per_onu;
  TransceiverState trx{alloc.onu_id, static_cast<int>(first), std::nullopt, TimeNs{}};
  if (first < all.size()) {
    trx = all[first];
    for (std::size_t i = first + 1; i < first + per_onu && i < all.size(); ++i)
      if (all[i].earliest_free < trx.earliest_free) trx = all[i];
  }

  int channel = -1;
  TimeNs channel_free = TimeNs::max();
  for (int c = 0; c < tables.channels.size(); ++c) {
    const TimeNs t = std::max({tables.channels.earliest_free(c),
                               tables.receivers.for_channel(c).earliest_free, requested});
    const bool stays = trx.current_channel && *trx.current_channel == c;
    if (t < channel_free || (t == channel_free && stays)) {
      channel = c;
      channel_free = t;
    }
  }

  const bool tuned = trx.current_channel.has_value() && *trx.current_channel != channel;
  const TimeNs trx_ready = trx.earliest_free + (tuned ? config.tuning_time : TimeNs{});
  const TimeNs start = std::max(channel_free, trx_ready);

  Placement p;
  p.start = start;
  p.end = start + length;
  p.grant.alloc_id = alloc.alloc_id;
  p.grant.channel = channel;
  p.grant.scheduled_start = start - alloc.frame_index * config.frame_duration;
  p.grant.transceiver_id = trx.transceiver_id;
  p.grant.receiver_id = tables.receivers.for_channel(channel).receiver_id;
  p.grant.tuned = tuned;
  return p;
}

void commit(const Placement& placement, const Allocation& alloc, FreeTimeTables& tables) {
  const auto& g = placement.grant;
  tables.channels.occupy_until(g.channel, placement.end);
  tables.receivers.for_channel(g.channel).earliest_free = placement.end;
  auto trxs = tables.transceivers.of_onu(alloc.onu_id);
  for (auto& t : trxs) {
    if (t.transceiver_id != g.transceiver_id) continue;
    t.earliest_free = placement.end;
    t.current_channel = g.channel;
  }
}

PhysicalGrant assign(const Allocation& alloc, FreeTimeTables& tables,
                     const ScenarioConfig& config, TimeNs not_before) {
  const Placement p = plan(alloc, tables, config, not_before);
  commit(p, alloc, tables);
  return p.grant;
}

MergingEngine::MergingEngine(const ScenarioConfig& config)
    : config_(config), tables_(config.num_channels, config.transceivers_per_onu) {}

void MergingEngine::enqueue(const Allocation& alloc) {
  if (alloc.flow_id < 0) throw std::invalid_argument("negative flow id");
  if (static_cast<std::size_t>(alloc.flow_id) >= backlog_.size())
    backlog_.resize(static_cast<std::size_t>(alloc.flow_id) + 1);
  auto& q = backlog_[static_cast<std::size_t>(alloc.flow_id)];
  // New work almost always belongs at the back.
  auto it = q.end();
  while (it != q.begin() && queue_order(alloc, std::prev(it)->alloc, config_.frame_duration)) --it;
  q.insert(it, Pending{alloc, false});
  ++backlog_count_;
}

void MergingEngine::record(MergeOutcome& out, const Allocation& alloc, const Placement& p) {
  out.physical_bmap.push_back(p.grant);
  out.served.push_back(alloc);
  out.delays.push_back(p.grant.scheduled_start - alloc.requested_start);
  if (p.grant.tuned) ++out.retunes;
  if (alloc.sla && p.grant.scheduled_start > alloc.maxtime) ++out.past_maxtime;
}

MergeOutcome MergingEngine::merge_frame(std::span<const VirtualBmap> vbmaps,
                                        const SlaTracker& flows) {
  const std::int64_t frame_index = vbmaps.empty() ? next_frame_ : vbmaps.front().frame_index;
  for (const auto& b : vbmaps)
    if (b.frame_index != frame_index)
      throw std::invalid_argument("vBMaps of different frames in one merge");
  if (started_ && frame_index < next_frame_)
    throw std::invalid_argument("frames must be merged in increasing order");
  started_ = true;
  next_frame_ = frame_index + 1;

  const TimeNs frame = config_.frame_duration;
  const TimeNs frame_start = frame_index * frame;
  const TimeNs deadline = frame_start + frame;

  MergeOutcome out;
  out.frame_index = frame_index;
  out.carried_in = static_cast<std::int64_t>(backlog_count_);

  // Clear allocations could all keep their requested start; they take
  // precedence over colliding and backlogged ones whenever both are waiting
  // for a channel.
  CollisionSplit split = detect_collisions(vbmaps, config_);
  out.colliding = static_cast<std::int64_t>(split.colliding.size());
  std::vector<Allocation> arrivals = std::move(split.clear);
  const std::size_t num_clear = arrivals.size();
  arrivals.insert(arrivals.end(), split.colliding.begin(), split.colliding.end());
  for (auto& a : arrivals) a.maxtime = compute_maxtime(a, config_.horizon());
  std::vector<std::size_t> release(arrivals.size());
  std::iota(release.begin(), release.end(), std::size_t{0});
  std::sort(release.begin(), release.end(), [&](std::size_t x, std::size_t y) {
    const auto& ax = arrivals[x];
    const auto& ay = arrivals[y];
    if (ax.requested_start != ay.requested_start) return ax.requested_start < ay.requested_start;
    return ax.alloc_id < ay.alloc_id;
  });

  // Contenders for the next free channel. Backlogged allocations are all
  // released at the frame start; only the head of each flow's queue sits in
  // the heap since the rest of the queue is already in key order.
  struct Entry {
    SortKey key;
    int flow;           // -1 for a new arrival
    std::size_t index;  // into arrivals or into backlog_[flow]
    bool colliding = true;
    bool operator>(const Entry& o) const {
      return colliding != o.colliding ? colliding : key > o.key;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  auto key_of = [&](const Allocation& a) {
    return collision_sort_key(a, flows.state(a.flow_id), config_);
  };
  std::vector<std::size_t> cursor(backlog_.size(), 0);
  for (std::size_t f = 0; f < backlog_.size(); ++f)
    if (!backlog_[f].empty()) ready.push({key_of(backlog_[f].front().alloc), static_cast<int>(f), 0});

  // Contenders whose transceiver is still busy (or retuning) when a channel
  // frees up step aside until it is ready, so the channel goes to the next
  // contender instead of idling.
  using Parked = std::pair<TimeNs, Entry>;
  auto later = [](const Parked& x, const Parked& y) {
    return x.first != y.first ? x.first > y.first : x.second > y.second;
  };
  std::priority_queue<Parked, std::vector<Parked>, decltype(later)> parked(later);

  std::vector<char> arrival_granted(arrivals.size(), 0);
  std::size_t next_arrival = 0;
  bool inject = fault_ == FaultInjection::kForceOverlap;

  while (true) {
    TimeNs channel_free = TimeNs::max();
    for (int c = 0; c < tables_.channels.size(); ++c)
      channel_free = std::min(channel_free, std::max(tables_.channels.earliest_free(c),
                                                     tables_.receivers.for_channel(c).earliest_free));
    if (channel_free >= deadline) break;

    TimeNs now = std::max(channel_free, frame_start);
    if (ready.empty()) {
      TimeNs next = TimeNs::max();
      if (next_arrival < arrivals.size())
        next = frame_start + arrivals[release[next_arrival]].requested_start;
      if (!parked.empty()) next = std::min(next, parked.top().first);
      if (next == TimeNs::max()) break;
      now = std::max(now, next);
    }
    while (next_arrival < arrivals.size() &&
           frame_start + arrivals[release[next_arrival]].requested_start <= now) {
      const std::size_t i = release[next_arrival];
      ready.push({key_of(arrivals[i]), -1, i, i >= num_clear});
      ++next_arrival;
    }
    while (!parked.empty() && parked.top().first <= now) {
      ready.push(parked.top().second);
      parked.pop();
    }

    const Entry e = ready.top();
    ready.pop();
    const Allocation& a = e.flow < 0 ? arrivals[e.index]
                                     : backlog_[static_cast<std::size_t>(e.flow)][e.index].alloc;
    Placement p = plan(a, tables_, config_, frame_start);
    bool forced = false;
    if (inject && !out.physical_bmap.empty()) {
      // Test hook: start this grant inside the previous one on its channel.
      const auto& prev = out.physical_bmap.back();
      const auto& prev_alloc = out.served.back();
      const TimeNs prev_start = prev_alloc.frame_index * frame + prev.scheduled_start;
      const TimeNs prev_end = prev_start + burst_length(prev_alloc, config_);
      const TimeNs start = std::max(prev_start, a.absolute_request(frame));
      if (start < prev_end) {
        inject = false;
        forced = true;
        p.grant.channel = prev.channel;
        p.grant.receiver_id = prev.receiver_id;
        p.start = start;
        p.end = start + burst_length(a, config_);
        p.grant.scheduled_start = start - a.frame_index * frame;
      }
    }
    if (p.start > now && p.start < deadline && !forced) {
      parked.push({p.start, e});
      continue;
    }
    const bool placed = p.start < deadline || forced;
    if (placed) {
      commit(p, a, tables_);
      record(out, a, p);
      if (e.flow < 0) {
        arrival_granted[e.index] = 1;
      } else {
        backlog_[static_cast<std::size_t>(e.flow)][e.index].granted = true;
        --backlog_count_;
      }
    }
    // Backlogged entries of one flow share the ONU and all request the frame
    // start, and the tables only move forward; once one of them misses the
    // frame, so does the rest of its queue.
    if (e.flow >= 0 && placed) {
      const auto f = static_cast<std::size_t>(e.flow);
      if (e.index + 1 > cursor[f]) {
        cursor[f] = e.index + 1;
        if (cursor[f] < backlog_[f].size())
          ready.push({key_of(backlog_[f][cursor[f]].alloc), e.flow, cursor[f]});
      }
    }
  }

  for (std::size_t f = 0; f < cursor.size(); ++f) {
    auto& q = backlog_[f];
    const auto end = q.begin() + static_cast<std::ptrdiff_t>(cursor[f]);
    q.erase(std::remove_if(q.begin(), end, [](const Pending& p) { return p.granted; }), end);
  }
  for (std::size_t i = 0; i < arrivals.size(); ++i)
    if (!arrival_granted[i]) enqueue(arrivals[i]);

  out.carried_out = static_cast<std::int64_t>(backlog_count_);
  return out;
}

}  // namespace twdm
