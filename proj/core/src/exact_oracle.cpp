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

#include "twdm/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "twdm/merging_engine.hpp"
#include "twdm/rng.hpp"
#include "twdm/sla_tracker.hpp"
#include "twdm/traffic.hpp"

namespace twdm {
namespace {

using Mask = std::uint32_t;

Mask span_mask(int start, int length) {
  return ((Mask{1} << length) - 1) << start;
}

bool flow_breached(int breaches, int total, std::int64_t threshold_bp) {
  return static_cast<std::int64_t>(breaches) * 10'000 > static_cast<std::int64_t>(total) * threshold_bp;
}

struct FlowIndex {
  std::vector<int> of_alloc;  // dense flow index per flat allocation
  std::vector<int> size;
  std::vector<std::int64_t> threshold_bp;
};

FlowIndex index_flows(const DiscreteInstance& instance) {
  FlowIndex f;
  std::vector<int> ids;
  for (const auto& a : instance.flat()) {
    auto it = std::find(ids.begin(), ids.end(), a.flow_id);
    if (it == ids.end()) {
      ids.push_back(a.flow_id);
      f.size.push_back(0);
      f.threshold_bp.push_back(a.threshold_bp);
      it = ids.end() - 1;
    }
    const auto k = static_cast<int>(it - ids.begin());
    f.of_alloc.push_back(k);
    ++f.size[static_cast<std::size_t>(k)];
  }
  return f;
}

class Search {
 public:
  explicit Search(const DiscreteInstance& instance)
      : in_(instance), flows_(index_flows(instance)), n_(instance.size()),
        masks_(static_cast<std::size_t>(instance.num_channels()), 0),
        breaches_(flows_.size.size(), 0), chosen_(n_) {}

  // Smallest achievable objective, searched in an order that finds good
  // incumbents early.
  OracleObjective optimum() {
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      const auto& a = in_.flat()[x];
      const auto& b = in_.flat()[y];
      return std::pair(a.maxtime_slot, a.requested_slot) < std::pair(b.maxtime_slot, b.requested_slot);
    });
    order_ = order;
    target_.reset();
    best_.reset();
    early_first_ = true;
    dfs(0, -1);
    if (!best_) throw Infeasible("no assignment satisfies the slot constraints");
    return *best_;
  }

  // First assignment, in lexicographic (channel, start) order over the
  // instance's own allocation order, that reaches `value`.
  std::vector<SlotAssignment> smallest_with(OracleObjective value) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    target_ = value;
    best_.reset();
    early_first_ = false;
    dfs(0, -1);
    if (!best_) throw Infeasible("optimum could not be reproduced");
    return best_assignment_;
  }

  std::int64_t nodes() const { return nodes_; }

 private:
  OracleObjective current() const {
    OracleObjective o;
    for (std::size_t f = 0; f < breaches_.size(); ++f) {
      o.packet_breaches += breaches_[f];
      if (flow_breached(breaches_[f], flows_.size[f], flows_.threshold_bp[f])) ++o.flow_breaches;
    }
    return o;
  }

  // Breaches already committed plus those no remaining free cell can avoid.
  OracleObjective lower_bound(std::size_t depth) const {
    std::vector<int> forced = breaches_;
    for (std::size_t k = depth; k < n_; ++k) {
      const auto& a = in_.flat()[order_[k]];
      bool avoidable = false;
      for (int t = a.requested_slot; t <= a.maxtime_slot && t + a.length <= in_.num_slots() && !avoidable; ++t)
        for (Mask m : masks_)
          if ((m & span_mask(t, a.length)) == 0) {
            avoidable = true;
            break;
          }
      if (!avoidable) ++forced[static_cast<std::size_t>(flows_.of_alloc[order_[k]])];
    }
    OracleObjective o;
    for (std::size_t f = 0; f < forced.size(); ++f) {
      o.packet_breaches += forced[f];
      if (flow_breached(forced[f], flows_.size[f], flows_.threshold_bp[f])) ++o.flow_breaches;
    }
    return o;
  }

  bool prune(const OracleObjective& bound) const {
    if (target_) return best_.has_value() || bound > *target_;
    return best_ && bound >= *best_;
  }

  void dfs(std::size_t depth, int max_channel) {
    ++nodes_;
    if (depth == n_) {
      const OracleObjective value = current();
      if (target_ ? value == *target_ : (!best_ || value < *best_)) {
        best_ = value;
        best_assignment_ = chosen_;
      }
      return;
    }
    if (prune(lower_bound(depth))) return;

    const std::size_t i = order_[depth];
    const auto& a = in_.flat()[i];
    const int flow = flows_.of_alloc[i];
    // Channels are interchangeable, so a fresh one is only ever opened as
    // the next unused index.
    const int channels = std::min(in_.num_channels(), max_channel + 2);
    auto visit = [&](int c, int t) {
      const Mask m = span_mask(t, a.length);
      auto& busy = masks_[static_cast<std::size_t>(c)];
      if (busy & m) return;
      busy |= m;
      const bool late = t > a.maxtime_slot;
      if (late) ++breaches_[static_cast<std::size_t>(flow)];
      chosen_[i] = {c, t};
      dfs(depth + 1, std::max(max_channel, c));
      if (late) --breaches_[static_cast<std::size_t>(flow)];
      busy &= ~m;
    };
    const int last = in_.num_slots() - a.length;
    if (early_first_) {
      for (int t = a.requested_slot; t <= last; ++t)
        for (int c = 0; c < channels; ++c) {
          visit(c, t);
          if (prune(current())) return;
        }
    } else {
      for (int c = 0; c < channels; ++c)
        for (int t = a.requested_slot; t <= last; ++t) {
          visit(c, t);
          if (target_ && best_) return;
        }
    }
  }

  const DiscreteInstance& in_;
  FlowIndex flows_;
  std::size_t n_;
  std::vector<Mask> masks_;
  std::vector<int> breaches_;
  std::vector<SlotAssignment> chosen_;
  std::vector<std::size_t> order_;
  std::optional<OracleObjective> target_;
  std::optional<OracleObjective> best_;
  std::vector<SlotAssignment> best_assignment_;
  bool early_first_ = true;
  std::int64_t nodes_ = 0;
};

}  // namespace

DiscreteInstance::DiscreteInstance(int num_channels, int num_slots,
                                   std::vector<std::vector<DiscreteAllocation>> vbmaps)
    : num_channels_(num_channels), num_slots_(num_slots), vbmaps_(std::move(vbmaps)) {
  if (num_channels < 1 || num_slots < 1) throw ConfigError("instance needs channels and slots");
  if (num_slots > 31) throw InstanceTooLarge("more than 31 slots");
  std::int64_t total = 0;
  for (const auto& b : vbmaps_) {
    for (const auto& a : b) {
      if (a.length < 1 || a.requested_slot < 0 || a.requested_slot + a.length > num_slots)
        throw ConfigError("allocation does not fit in the slot range");
      if (a.maxtime_slot < a.requested_slot) throw ConfigError("maxtime before requested slot");
      if (a.threshold_bp < 0 || a.threshold_bp > 10'000) throw ConfigError("threshold out of range");
      total += a.length;
      flat_.push_back(a);
    }
  }
  for (std::size_t i = 0; i < flat_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (flat_[i].flow_id == flat_[j].flow_id && flat_[i].threshold_bp != flat_[j].threshold_bp)
        throw ConfigError("flow " + std::to_string(flat_[i].flow_id) + " has two thresholds");
  if (total > static_cast<std::int64_t>(num_channels) * num_slots)
    throw Infeasible("allocations exceed channel-slot capacity");
}

std::pair<int, int> DiscreteInstance::position(std::size_t flat_index) const {
  int v = 0;
  for (const auto& b : vbmaps_) {
    if (flat_index < b.size()) return {v, static_cast<int>(flat_index)};
    flat_index -= b.size();
    ++v;
  }
  throw std::out_of_range("flat index past the last allocation");
}

AssignmentMatrix::AssignmentMatrix(const DiscreteInstance& instance,
                                   const std::vector<SlotAssignment>& starts)
    : instance_(&instance) {
  if (starts.size() != instance.size()) throw std::invalid_argument("assignment size mismatch");
  const auto cells = static_cast<std::size_t>(instance.num_channels() * instance.num_slots());
  for (const auto& b : instance.vbmaps())
    x_.emplace_back(b.size(), std::vector<std::uint8_t>(cells, 0));
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto [v, a] = instance.position(i);
    const auto& s = starts[i];
    if (s.channel < 0 || s.channel >= instance.num_channels() || s.start < 0 ||
        s.start >= instance.num_slots())
      throw Infeasible("assignment outside the channel-slot grid");
    x_[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)]
      [static_cast<std::size_t>(s.channel * instance.num_slots() + s.start)] = 1;
  }
}

bool AssignmentMatrix::at(int v, int a, int c, int t) const {
  return x_[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)]
           [static_cast<std::size_t>(c * instance_->num_slots() + t)] != 0;
}

bool AssignmentMatrix::satisfies_constraints() const {
  const int C = instance_->num_channels();
  const int T = instance_->num_slots();
  std::vector<int> cover(static_cast<std::size_t>(C * T), 0);
  for (std::size_t v = 0; v < x_.size(); ++v) {
    for (std::size_t a = 0; a < x_[v].size(); ++a) {
      const auto& alloc = instance_->vbmaps()[v][a];
      int starts = 0;
      for (int c = 0; c < C; ++c) {
        for (int t = 0; t < T; ++t) {
          if (!x_[v][a][static_cast<std::size_t>(c * T + t)]) continue;
          ++starts;
          if (t + alloc.length > T) return false;
          for (int k = t; k < t + alloc.length; ++k) ++cover[static_cast<std::size_t>(c * T + k)];
        }
      }
      if (starts != 1) return false;
    }
  }
  return std::all_of(cover.begin(), cover.end(), [](int n) { return n <= 1; });
}

OracleObjective objective(const DiscreteInstance& instance,
                          const std::vector<SlotAssignment>& assignment) {
  if (!AssignmentMatrix(instance, assignment).satisfies_constraints())
    throw Infeasible("assignment overlaps or leaves the grid");
  const FlowIndex flows = index_flows(instance);
  std::vector<int> breaches(flows.size.size(), 0);
  OracleObjective o;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto& a = instance.flat()[i];
    if (assignment[i].start < a.requested_slot) throw Infeasible("allocation moved earlier");
    if (assignment[i].start > a.maxtime_slot) {
      ++o.packet_breaches;
      ++breaches[static_cast<std::size_t>(flows.of_alloc[i])];
    }
  }
  for (std::size_t f = 0; f < breaches.size(); ++f)
    if (flow_breached(breaches[f], flows.size[f], flows.threshold_bp[f])) ++o.flow_breaches;
  return o;
}

ExactSolution solve_exact(const DiscreteInstance& instance) {
  if (instance.num_channels() > kOracleMaxChannels || instance.num_slots() > kOracleMaxSlots ||
      instance.size() > static_cast<std::size_t>(kOracleMaxAllocations))
    throw InstanceTooLarge("exact search is limited to " + std::to_string(kOracleMaxChannels) +
                           " channels, " + std::to_string(kOracleMaxSlots) + " slots and " +
                           std::to_string(kOracleMaxAllocations) + " allocations");
  Search search(instance);
  ExactSolution s;
  s.value = search.optimum();
  s.assignment = search.smallest_with(s.value);
  s.nodes = search.nodes();
  return s;
}

SlotConversion to_continuous(const DiscreteInstance& instance, const ScenarioConfig& base) {
  SlotConversion out;
  out.config = base;
  out.config.num_channels = instance.num_channels();
  out.config.tuning_time = TimeNs{};
  out.config.transceivers_per_onu = 1;
  out.config.horizon_frames = std::max(out.config.horizon_frames, 1);
  const auto burst = duration_for_bits(base.mean_burst_bits(), base.channel_rate);
  out.slot_width = burst + base.guard_time;
  out.config.frame_duration = out.slot_width * instance.num_slots();

  const auto rate = static_cast<double>(base.channel_rate.bits_per_second) * 1e-9;
  std::size_t flat = 0;
  for (std::size_t v = 0; v < instance.vbmaps().size(); ++v) {
    VirtualBmap b{static_cast<int>(v), 0, {}};
    for (const auto& d : instance.vbmaps()[v]) {
      Allocation a;
      a.alloc_id = flat;
      a.vno_id = static_cast<int>(v);
      a.onu_id = static_cast<int>(flat);  // one ONU per allocation
      a.flow_id = d.flow_id;
      a.requested_start = out.slot_width * d.requested_slot;
      const TimeNs on_air = out.slot_width * d.length - base.guard_time;
      a.payload_bits = std::llround(std::floor(static_cast<double>(on_air.count()) * rate));
      if (duration_on(a, base.channel_rate) != on_air)
        throw ConversionMismatch("slot width is not a whole number of bit times");
      a.sla = SlaClass{out.slot_width * (d.maxtime_slot - d.requested_slot),
                       100.0 - static_cast<double>(d.threshold_bp) / 100.0};
      a.maxtime = compute_maxtime(a, out.config.horizon());
      b.allocations.push_back(a);
      ++flat;
    }
    out.vbmaps.push_back(std::move(b));
  }
  return out;
}

GapResult heuristic_gap(const DiscreteInstance& instance, const ScenarioConfig& base) {
  const SlotConversion conv = to_continuous(instance, base);

  std::vector<FlowProfile> flows;
  for (const auto& a : instance.flat()) {
    if (a.flow_id < 0) throw ConfigError("negative flow id");
    if (static_cast<std::size_t>(a.flow_id) >= flows.size())
      flows.resize(static_cast<std::size_t>(a.flow_id) + 1);
    auto& f = flows[static_cast<std::size_t>(a.flow_id)];
    f.flow_id = a.flow_id;
    f.sla = SlaClass{TimeNs{}, 100.0 - static_cast<double>(a.threshold_bp) / 100.0};
  }
  const SlaTracker tracker(flows, conv.config.window_frames, conv.config.window_mode);

  MergingEngine engine(conv.config);
  const MergeOutcome out = engine.merge_frame(conv.vbmaps, tracker);
  if (out.physical_bmap.size() != instance.size())
    throw ConversionMismatch("heuristic left " + std::to_string(instance.size() - out.physical_bmap.size()) +
                             " allocations unscheduled inside the slot range");

  GapResult r;
  r.heuristic_assignment.resize(instance.size());
  for (const auto& g : out.physical_bmap) {
    if (g.scheduled_start % conv.slot_width != TimeNs{})
      throw ConversionMismatch("grant " + std::to_string(g.alloc_id) + " is not slot aligned");
    r.heuristic_assignment[g.alloc_id] = {g.channel, static_cast<int>(g.scheduled_start / conv.slot_width)};
  }
  r.heuristic = objective(instance, r.heuristic_assignment);
  r.exact = solve_exact(instance).value;
  if (r.heuristic < r.exact)
    throw std::logic_error("heuristic beat the exact optimum");
  return r;
}

DiscreteInstance random_instance(std::uint64_t seed, const InstanceShape& shape) {
  RngStream rng(seed);
  const int channels = static_cast<int>(rng.uniform_int(1, shape.max_channels));
  const int slots = shape.max_slots;
  const int n = static_cast<int>(rng.uniform_int(shape.min_allocations, shape.max_allocations));
  const int vbmaps = static_cast<int>(rng.uniform_int(1, shape.max_vbmaps));
  const int num_flows = static_cast<int>(rng.uniform_int(1, std::max(1, n / 2)));
  constexpr std::int64_t kThresholds[] = {0, 2'500, 5'000};

  std::vector<std::int64_t> flow_threshold(static_cast<std::size_t>(num_flows));
  for (auto& t : flow_threshold) t = kThresholds[rng.uniform_int(0, 2)];

  std::vector<DiscreteAllocation> all(static_cast<std::size_t>(n));
  int total = 0;
  for (auto& a : all) {
    a.length = total + 2 <= slots - n ? static_cast<int>(rng.uniform_int(1, 2)) : 1;
    total += a.length;
  }
  const int latest = std::max(0, slots - total);
  for (auto& a : all) {
    a.requested_slot = static_cast<int>(rng.uniform_int(0, latest));
    a.maxtime_slot = a.requested_slot + static_cast<int>(rng.uniform_int(0, 2));
    a.flow_id = static_cast<int>(rng.uniform_int(0, num_flows - 1));
    a.threshold_bp = flow_threshold[static_cast<std::size_t>(a.flow_id)];
  }
  std::vector<std::vector<DiscreteAllocation>> maps(static_cast<std::size_t>(vbmaps));
  for (const auto& a : all) maps[static_cast<std::size_t>(rng.uniform_int(0, vbmaps - 1))].push_back(a);
  return DiscreteInstance(channels, slots, std::move(maps));
}

}  // namespace twdm
