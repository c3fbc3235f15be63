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

#include "twdm/free_tables.hpp"

#include <algorithm>

namespace twdm {

TimeNs ChannelFreeTable::min_free() const {
  return free_.empty() ? TimeNs::max() : *std::min_element(free_.begin(), free_.end());
}

ReceiverTable::ReceiverTable(int num_channels) {
  receivers_.resize(static_cast<std::size_t>(num_channels));
  for (int c = 0; c < num_channels; ++c) receivers_[static_cast<std::size_t>(c)].receiver_id = c;
}

std::span<TransceiverState> TransceiverTable::of_onu(int onu_id) {
  const auto first = static_cast<std::size_t>(onu_id) * static_cast<std::size_t>(per_onu_);
  while (states_.size() < first + static_cast<std::size_t>(per_onu_)) {
    const auto idx = static_cast<int>(states_.size());
    states_.push_back(TransceiverState{idx / per_onu_, idx, std::nullopt, TimeNs{}});
  }
  return std::span<TransceiverState>(states_).subspan(first, static_cast<std::size_t>(per_onu_));
}

}  // namespace twdm
