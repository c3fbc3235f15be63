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

#ifndef TWDM_FREE_TABLES_HPP_
#define TWDM_FREE_TABLES_HPP_

#include <optional>
#include <span>
#include <vector>

#include "twdm/model.hpp"

namespace twdm {

// Earliest free time of every wavelength channel.
class ChannelFreeTable {
 public:
  explicit ChannelFreeTable(int num_channels = 0)
      : free_(static_cast<std::size_t>(num_channels)) {}
  int size() const { return static_cast<int>(free_.size()); }
  TimeNs earliest_free(int c) const { return free_[static_cast<std::size_t>(c)]; }
  void occupy_until(int c, TimeNs t) { free_[static_cast<std::size_t>(c)] = t; }
  TimeNs min_free() const;

 private:
  std::vector<TimeNs> free_;
};

// One OLT burst-mode receiver per wavelength, tracked apart from the channel.
class ReceiverTable {
 public:
  struct Receiver {
    int receiver_id = 0;
    TimeNs earliest_free{};
  };
  explicit ReceiverTable(int num_channels = 0);
  Receiver& for_channel(int c) { return receivers_[static_cast<std::size_t>(c)]; }
  const Receiver& for_channel(int c) const { return receivers_[static_cast<std::size_t>(c)]; }

 private:
  std::vector<Receiver> receivers_;
};

struct TransceiverState {
  int onu_id = 0;
  int transceiver_id = 0;
  std::optional<int> current_channel;  // absent before first use
  TimeNs earliest_free{};
};

// Transceivers of every ONU, onu-major; grows on first use of an ONU id.
class TransceiverTable {
 public:
  explicit TransceiverTable(int per_onu = 1) : per_onu_(per_onu) {}
  int per_onu() const { return per_onu_; }
  std::span<TransceiverState> of_onu(int onu_id);
  std::span<const TransceiverState> all() const { return states_; }

 private:
  int per_onu_;
  std::vector<TransceiverState> states_;
};

struct FreeTimeTables {
  ChannelFreeTable channels;
  ReceiverTable receivers;
  TransceiverTable transceivers;

  FreeTimeTables(int num_channels, int transceivers_per_onu)
      : channels(num_channels), receivers(num_channels), transceivers(transceivers_per_onu) {}
};

}  // namespace twdm

#endif  // TWDM_FREE_TABLES_HPP_
