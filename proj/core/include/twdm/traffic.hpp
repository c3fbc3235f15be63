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

#ifndef TWDM_TRAFFIC_HPP_
#define TWDM_TRAFFIC_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "twdm/model.hpp"
#include "twdm/rng.hpp"

namespace twdm {

struct FlowProfile {
  int flow_id = 0;
  int vno_id = 0;
  int onu_id = 0;  // global ONU index
  std::optional<SlaClass> sla;
  double weight = 1.0;  // relative share inside its VNO
};

// num_vnos * onus_per_vno * flows_per_onu flows with equal weights.
// round(sla_share * N) of them are SLA flows, interleaved across VNOs and
// ONUs and split between the two built-in classes.
std::vector<FlowProfile> build_flow_population(const ScenarioConfig& config);

// Rate the virtual timeline of a vBMap runs at: the VNO's weighted share of
// the aggregate PON rate in single mode, the per-channel rate in
// full-capacity mode.
LineRate virtual_timeline_rate(const ScenarioConfig& config, int vno_id);

// Total payload bits VNO `vno_id` offers per frame.
std::int64_t vno_target_bits(const ScenarioConfig& config, int vno_id);

// One vBMap for one VNO and frame. Throws ConfigError if the offered load
// does not fit on the VNO's virtual timeline.
VirtualBmap generate_vbmap(std::span<const FlowProfile> vno_flows, int vno_id,
                           std::int64_t frame_index,
                           const ScenarioConfig& config, RngStream& rng);

// One vBMap per VNO. Each (vno, frame) pair draws from its own stream seeded
// from config.seed, so frames can be generated in any order.
std::vector<VirtualBmap> generate_frame(std::span<const FlowProfile> flows,
                                        std::int64_t frame_index,
                                        const ScenarioConfig& config);

// Groups a flow population by VNO once, then generates frames from it.
class TrafficGenerator {
 public:
  explicit TrafficGenerator(const ScenarioConfig& config);

  const std::vector<FlowProfile>& flows() const { return flows_; }
  std::vector<VirtualBmap> generate(std::int64_t frame_index) const;

 private:
  ScenarioConfig config_;
  std::vector<FlowProfile> flows_;
  std::vector<std::vector<FlowProfile>> by_vno_;
};

}  // namespace twdm

#endif  // TWDM_TRAFFIC_HPP_
