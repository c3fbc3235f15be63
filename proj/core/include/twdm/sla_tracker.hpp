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

#ifndef TWDM_SLA_TRACKER_HPP_
#define TWDM_SLA_TRACKER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "twdm/model.hpp"
#include "twdm/traffic.hpp"

namespace twdm {

// Delayed/total slot counts of one flow in one frame.
struct FrameTally {
  std::int64_t frame_index = -1;
  std::int64_t delayed_slots = 0;
  std::int64_t total_slots = 0;
};

// One row of the flow-breach likelihood table: a ring of per-frame tallies
// covering the last `window_frames` frames.
class FlowState {
 public:
  FlowState(int flow_id, SlaClass sla, int window_frames = kWindowFrames,
            WindowMode mode = WindowMode::kSliding);

  // A slot is delayed iff delay > latency_target.
  void record_grant(TimeNs delay, std::int64_t frame_index);
  // Slides the window to end at `frame_index` and refreshes the cached rate.
  void recompute(std::int64_t frame_index);

  // Rate strictly above the tolerated non-compliance fraction. Empty windows
  // never breach.
  bool is_breached() const {
    return delayed_ * 10'000 > total_ * sla_.non_compliance_bp();
  }

  int flow_id() const { return flow_id_; }
  const SlaClass& sla() const { return sla_; }
  std::int64_t window_delayed() const { return delayed_; }
  std::int64_t window_total() const { return total_; }
  double non_compliance_rate() const {
    return total_ == 0 ? 0.0 : static_cast<double>(delayed_) / static_cast<double>(total_);
  }
  // Distance to breach; smaller means closer.
  double margin() const { return sla_.non_compliance_threshold() - non_compliance_rate(); }

 private:
  FrameTally& slot_for(std::int64_t frame_index);

  int flow_id_;
  SlaClass sla_;
  WindowMode mode_;
  std::vector<FrameTally> ring_;
  std::int64_t delayed_ = 0;
  std::int64_t total_ = 0;
};

class SlaTracker {
 public:
  SlaTracker() = default;
  SlaTracker(std::span<const FlowProfile> flows, int window_frames,
             WindowMode mode = WindowMode::kSliding);

  // Ignored for best-effort flows.
  void record_grant(int flow_id, TimeNs delay, std::int64_t frame_index);
  // Called once per frame after all grants of that frame were recorded.
  void recompute_rates(std::int64_t frame_index);

  // nullptr for best-effort or unknown flows.
  const FlowState* state(int flow_id) const;
  int sla_flow_count() const { return sla_flows_; }
  int breached_count() const;

 private:
  std::vector<std::optional<FlowState>> states_;
  int sla_flows_ = 0;
};

}  // namespace twdm

#endif  // TWDM_SLA_TRACKER_HPP_
