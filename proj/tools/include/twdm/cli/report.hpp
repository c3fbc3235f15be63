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

#ifndef TWDM_CLI_REPORT_HPP_
#define TWDM_CLI_REPORT_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twdm/sim_runner.hpp"

namespace twdm::cli {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// num_channels,channel_rate_gbps,tuning_time_ns,load_pct,sla_share_pct,seed,
// compliance_pct,breach_events,mean_delay_ns,p99_delay_ns,retunes
const std::string& csv_header();

// Percentages with two decimals, times in whole nanoseconds. A failed
// scenario keeps its coordinates and leaves the measurements empty.
std::string csv_row(const ScenarioResult& r);
void write_csv(std::ostream& os, const std::vector<ScenarioResult>& results);

struct SweepRow {
  int num_channels = 0;
  std::int64_t channel_rate_gbps = 0;
  std::int64_t tuning_time_ns = 0;
  double load_pct = 0.0;
  double sla_share_pct = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> compliance_pct;  // empty for failed scenarios
};

std::vector<SweepRow> read_sweep_csv(std::istream& is);

// One curve of a compliance figure: x = SLA share, y = seed-averaged
// compliance, for one channel configuration at one load.
struct Series {
  int num_channels = 0;
  std::int64_t channel_rate_gbps = 0;
  double load_pct = 0.0;
  std::vector<std::pair<double, double>> points;  // (sla_share_pct, compliance_pct)

  std::string label() const;  // e.g. "8x25G load 80%"
};

// Series for one tuning time, channel configs and loads in first-seen
// order. Throws CsvError when the sweep has no row at that tuning time.
std::vector<Series> figure_series(const std::vector<SweepRow>& rows, std::int64_t tuning_ns);

// Wide CSV: sla_share_pct followed by one column per series.
void write_figure_csv(std::ostream& os, const std::vector<Series>& series);
// gnuplot data: one indexable block per series, columns share and compliance.
void write_gnuplot(std::ostream& os, const std::vector<Series>& series, std::int64_t tuning_ns);

}  // namespace twdm::cli

#endif  // TWDM_CLI_REPORT_HPP_
