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

#ifndef TWDM_INVARIANTS_HPP_
#define TWDM_INVARIANTS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "twdm/merging_engine.hpp"
#include "twdm/model.hpp"

namespace twdm {

namespace detail {
// Disjoint half-open intervals keyed by start.
class IntervalSet {
 public:
  bool is_free(TimeNs start, TimeNs end) const;
  void insert(TimeNs start, TimeNs end) { spans_.emplace(start, end); }
  void prune_before(TimeNs t);

 private:
  std::map<TimeNs, TimeNs> spans_;
};
}  // namespace detail

struct InvariantReport {
  std::int64_t frames_checked = 0;
  std::int64_t grants_checked = 0;
  std::int64_t channel_overlaps = 0;
  std::int64_t receiver_overlaps = 0;
  std::int64_t transceiver_overlaps = 0;
  std::int64_t tuning_gap_violations = 0;
  std::int64_t negative_delays = 0;
  std::int64_t duplicate_grants = 0;
  std::int64_t conservation_errors = 0;
  std::vector<std::string> messages;  // first few, human readable

  std::int64_t violations() const {
    return channel_overlaps + receiver_overlaps + transceiver_overlaps +
           tuning_gap_violations + negative_delays + duplicate_grants +
           conservation_errors;
  }
  bool ok() const { return violations() == 0; }
  void merge(const InvariantReport& other);
};

// Independent re-check of every merge outcome against the physical
// constraints: per-channel and per-receiver exclusivity including guard,
// per-transceiver exclusivity with tuning gaps on wavelength changes,
// non-negative delays and one grant per allocation.
class InvariantChecker {
 public:
  explicit InvariantChecker(const ScenarioConfig& config);

  void observe_inputs(std::span<const VirtualBmap> vbmaps);
  void observe(const MergeOutcome& outcome);
  // `backlog` = allocations still pending in the engine.
  void finish(std::size_t backlog);

  const InvariantReport& report() const { return report_; }

 private:
  void fail(std::int64_t& counter, std::string message);

  ScenarioConfig config_;
  struct Burst {
    TimeNs start, end;
    int channel;
  };
  std::vector<detail::IntervalSet> channels_;
  std::vector<detail::IntervalSet> receivers_;
  std::vector<std::vector<Burst>> transceivers_;
  std::unordered_set<std::uint64_t> outstanding_;
  InvariantReport report_;
};

}  // namespace twdm

#endif  // TWDM_INVARIANTS_HPP_
