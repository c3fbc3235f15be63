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

#include "twdm/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace twdm {
namespace {

constexpr int kMaxAllocsPerVbmap = 1 << 16;

std::uint64_t make_alloc_id(std::int64_t frame_index, int vno_id, int index) {
  return (static_cast<std::uint64_t>(frame_index) << 24) |
         (static_cast<std::uint64_t>(vno_id) << 16) |
         static_cast<std::uint64_t>(index);
}

// Burst count with the right expectation: floor(x) plus one with
// probability frac(x).
int draw_burst_count(double expected, RngStream& rng) {
  const double base = std::floor(expected);
  int n = static_cast<int>(base);
  if (rng.uniform01() < expected - base) ++n;
  return std::max(n, 1);
}

// Uniform [0.5, 1.5] x mean sizes, rescaled so the frame total is exact.
std::vector<std::int64_t> draw_burst_sizes(int n, std::int64_t target_bits,
                                           double mean_bits, RngStream& rng) {
  std::vector<double> raw(static_cast<std::size_t>(n));
  for (auto& s : raw) s = mean_bits * (0.5 + rng.uniform01());
  const double scale =
      static_cast<double>(target_bits) / std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<std::int64_t> bits(raw.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
    bits[i] = std::max<std::int64_t>(1, std::llround(raw[i] * scale));
    assigned += bits[i];
  }
  bits.back() = std::max<std::int64_t>(1, target_bits - assigned);
  return bits;
}

// Places bursts uniformly at random on one lane of length `frame` without
// overlap: the idle time is split at n sorted uniform cut points.
void place_on_lane(std::vector<Allocation*>& lane, LineRate rate,
                   const ScenarioConfig& config, RngStream& rng) {
  TimeNs busy{};
  for (const Allocation* a : lane)
    busy += duration_on(*a, rate) + config.guard_time;
  const TimeNs slack = config.frame_duration - busy;
  if (slack < 0ns)
    throw ConfigError("offered load does not fit on the virtual timeline (" +
                      std::to_string(busy.count()) + " ns of " +
                      std::to_string(config.frame_duration.count()) +
                      " ns needed)");
  std::vector<std::int64_t> cuts(lane.size());
  for (auto& c : cuts) c = rng.uniform_int(0, slack.count());
  std::sort(cuts.begin(), cuts.end());
  TimeNs prefix{};
  for (std::size_t i = 0; i < lane.size(); ++i) {
    lane[i]->requested_start = TimeNs{cuts[i]} + prefix;
    prefix += duration_on(*lane[i], rate) + config.guard_time;
  }
}

}  // namespace

std::vector<FlowProfile> build_flow_population(const ScenarioConfig& config) {
  if (!(config.sla_share >= 0.0 && config.sla_share <= 1.0))
    throw ConfigError("sla_share must lie in [0, 1]");
  const int per_vno = config.onus_per_vno * config.flows_per_onu;
  const int total = config.num_vnos * per_vno;

  std::vector<FlowProfile> flows;
  flows.reserve(static_cast<std::size_t>(total));
  for (int v = 0; v < config.num_vnos; ++v) {
    for (int o = 0; o < config.onus_per_vno; ++o) {
      for (int f = 0; f < config.flows_per_onu; ++f) {
        FlowProfile p;
        p.flow_id = static_cast<int>(flows.size());
        p.vno_id = v;
        p.onu_id = v * config.onus_per_vno + o;
        flows.push_back(p);
      }
    }
  }

  // Hand out SLA status flow-slot first, then ONU, then VNO, so SLA load
  // spreads evenly over VNOs and ONUs.
  const auto sla_count = std::llround(config.sla_share * total);
  std::int64_t granted = 0;
  for (int f = 0; f < config.flows_per_onu && granted < sla_count; ++f) {
    for (int o = 0; o < config.onus_per_vno && granted < sla_count; ++o) {
      for (int v = 0; v < config.num_vnos && granted < sla_count; ++v) {
        auto& p = flows[static_cast<std::size_t>(
            (v * config.onus_per_vno + o) * config.flows_per_onu + f)];
        const double share = config.low_latency_class_share;
        const bool low =
            std::floor(static_cast<double>(granted + 1) * share) >
            std::floor(static_cast<double>(granted) * share);
        p.sla = low ? kSlaLowLatency : kSlaStandard;
        ++granted;
      }
    }
  }
  return flows;
}

LineRate virtual_timeline_rate(const ScenarioConfig& config, int vno_id) {
  if (config.timeline == VirtualTimeline::kFullCapacity) return config.channel_rate;
  const double share =
      static_cast<double>(config.aggregate_rate().bits_per_second) * config.vno_weight(vno_id);
  return LineRate{std::llround(share)};
}

std::int64_t vno_target_bits(const ScenarioConfig& config, int vno_id) {
  const double capacity_bits =
      static_cast<double>(config.aggregate_rate().bits_per_second) *
      static_cast<double>(config.frame_duration.count()) * 1e-9;
  return std::llround(config.load_fraction * capacity_bits *
                      config.vno_weight(vno_id));
}

VirtualBmap generate_vbmap(std::span<const FlowProfile> vno_flows, int vno_id,
                           std::int64_t frame_index,
                           const ScenarioConfig& config, RngStream& rng) {
  VirtualBmap bmap{vno_id, frame_index, {}};
  const std::int64_t target = vno_target_bits(config, vno_id);
  if (target <= 0 || vno_flows.empty()) return bmap;

  const auto mean = static_cast<double>(config.mean_burst_bits());
  const int n = draw_burst_count(static_cast<double>(target) / mean, rng);
  if (n >= kMaxAllocsPerVbmap)
    throw ConfigError("too many bursts per virtual bandwidth map");
  const auto sizes = draw_burst_sizes(n, target, mean, rng);

  // Like a polling DBA, the VNO serves its ONUs in rounds, each ONU once per
  // round in a fresh random order, and the ONU picks one of its flows by
  // weight. Two bursts of one ONU are adjacent on the timeline only across
  // a round boundary.
  std::vector<std::vector<const FlowProfile*>> onus;
  for (std::size_t k = 0; k < vno_flows.size(); ++k) {
    if (k == 0 || vno_flows[k].onu_id != vno_flows[k - 1].onu_id) onus.emplace_back();
    onus.back().push_back(&vno_flows[k]);
  }
  std::vector<std::size_t> round(onus.size());
  std::iota(round.begin(), round.end(), std::size_t{0});

  bmap.allocations.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto slot = static_cast<std::size_t>(i) % round.size();
    if (slot == 0) {
      for (std::size_t k = round.size(); k > 1; --k)
        std::swap(round[k - 1], round[static_cast<std::size_t>(
                                    rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);
    }
    const auto& onu = onus[round[slot]];
    double weight_total = 0.0;
    for (const FlowProfile* f : onu) weight_total += f->weight;
    double pick = rng.uniform01() * weight_total;
    const FlowProfile* flow = onu.back();
    for (const FlowProfile* f : onu) {
      if (pick < f->weight) {
        flow = f;
        break;
      }
      pick -= f->weight;
    }
    auto& a = bmap.allocations[static_cast<std::size_t>(i)];
    a.alloc_id = make_alloc_id(frame_index, vno_id, i);
    a.vno_id = vno_id;
    a.onu_id = flow->onu_id;
    a.flow_id = flow->flow_id;
    a.frame_index = frame_index;
    a.payload_bits = sizes[static_cast<std::size_t>(i)];
    a.sla = flow->sla;
  }

  const LineRate rate = virtual_timeline_rate(config, vno_id);
  const int lanes =
      config.timeline == VirtualTimeline::kSingle ? 1 : config.num_channels;
  std::vector<std::vector<Allocation*>> lane_members(static_cast<std::size_t>(lanes));
  for (int i = 0; i < n; ++i)
    lane_members[static_cast<std::size_t>(i % lanes)].push_back(
        &bmap.allocations[static_cast<std::size_t>(i)]);
  for (auto& lane : lane_members) place_on_lane(lane, rate, config, rng);

  for (auto& a : bmap.allocations) a.maxtime = compute_maxtime(a, config.horizon());
  std::stable_sort(bmap.allocations.begin(), bmap.allocations.end(),
                   [](const Allocation& x, const Allocation& y) {
                     return x.requested_start < y.requested_start;
                   });
  return bmap;
}

std::vector<VirtualBmap> generate_frame(std::span<const FlowProfile> flows,
                                        std::int64_t frame_index,
                                        const ScenarioConfig& config) {
  std::vector<VirtualBmap> out;
  out.reserve(static_cast<std::size_t>(config.num_vnos));
  std::vector<FlowProfile> vno_flows;
  for (int v = 0; v < config.num_vnos; ++v) {
    vno_flows.clear();
    for (const auto& f : flows)
      if (f.vno_id == v) vno_flows.push_back(f);
    RngStream rng(config.seed, v, frame_index);
    out.push_back(generate_vbmap(vno_flows, v, frame_index, config, rng));
  }
  return out;
}

TrafficGenerator::TrafficGenerator(const ScenarioConfig& config)
    : config_(config), flows_(build_flow_population(config)) {
  by_vno_.resize(static_cast<std::size_t>(config.num_vnos));
  for (const auto& f : flows_) by_vno_[static_cast<std::size_t>(f.vno_id)].push_back(f);
}

std::vector<VirtualBmap> TrafficGenerator::generate(std::int64_t frame_index) const {
  std::vector<VirtualBmap> out;
  out.reserve(by_vno_.size());
  for (int v = 0; v < config_.num_vnos; ++v) {
    RngStream rng(config_.seed, v, frame_index);
    out.push_back(generate_vbmap(by_vno_[static_cast<std::size_t>(v)], v,
                                 frame_index, config_, rng));
  }
  return out;
}

}  // namespace twdm
