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

#include "twdm/sla_tracker.hpp"

#include <algorithm>

namespace twdm {

FlowState::FlowState(int flow_id, SlaClass sla, int window_frames,
                     WindowMode mode)
    : flow_id_(flow_id),
      sla_(sla),
      mode_(mode),
      ring_(static_cast<std::size_t>(window_frames)) {}

FrameTally& FlowState::slot_for(std::int64_t frame_index) {
  const auto w = static_cast<std::int64_t>(ring_.size());
  auto& slot = ring_[static_cast<std::size_t>(((frame_index % w) + w) % w)];
  if (slot.frame_index != frame_index) slot = FrameTally{frame_index, 0, 0};
  return slot;
}

void FlowState::record_grant(TimeNs delay, std::int64_t frame_index) {
  auto& slot = slot_for(frame_index);
  ++slot.total_slots;
  if (delay > sla_.latency_target) ++slot.delayed_slots;
}

void FlowState::recompute(std::int64_t frame_index) {
  const auto w = static_cast<std::int64_t>(ring_.size());
  const std::int64_t oldest =
      mode_ == WindowMode::kSliding ? frame_index - w + 1 : frame_index - (frame_index % w);
  delayed_ = 0;
  total_ = 0;
  for (const auto& slot : ring_) {
    if (slot.frame_index >= oldest && slot.frame_index <= frame_index) {
      delayed_ += slot.delayed_slots;
      total_ += slot.total_slots;
    }
  }
}

SlaTracker::SlaTracker(std::span<const FlowProfile> flows, int window_frames,
                       WindowMode mode) {
  int max_id = -1;
  for (const auto& f : flows) max_id = std::max(max_id, f.flow_id);
  states_.resize(static_cast<std::size_t>(max_id + 1));
  for (const auto& f : flows) {
    if (!f.sla) continue;
    states_[static_cast<std::size_t>(f.flow_id)].emplace(f.flow_id, *f.sla,
                                                         window_frames, mode);
    ++sla_flows_;
  }
}

void SlaTracker::record_grant(int flow_id, TimeNs delay, std::int64_t frame_index) {
  if (flow_id < 0 || static_cast<std::size_t>(flow_id) >= states_.size()) return;
  auto& s = states_[static_cast<std::size_t>(flow_id)];
  if (s) s->record_grant(delay, frame_index);
}

void SlaTracker::recompute_rates(std::int64_t frame_index) {
  for (auto& s : states_)
    if (s) s->recompute(frame_index);
}

const FlowState* SlaTracker::state(int flow_id) const {
  if (flow_id < 0 || static_cast<std::size_t>(flow_id) >= states_.size()) return nullptr;
  const auto& s = states_[static_cast<std::size_t>(flow_id)];
  return s ? &*s : nullptr;
}

int SlaTracker::breached_count() const {
  int n = 0;
  for (const auto& s : states_)
    if (s && s->is_breached()) ++n;
  return n;
}

}  // namespace twdm
