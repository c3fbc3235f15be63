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

#include "twdm/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace twdm::cli {
namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line) {
  std::istringstream ss(s);
  T v{};
  if (!(ss >> v) || !ss.eof())
    throw CsvError("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

const std::string& csv_header() {
  static const std::string h =
      "num_channels,channel_rate_gbps,tuning_time_ns,load_pct,sla_share_pct,seed,"
      "compliance_pct,breach_events,mean_delay_ns,p99_delay_ns,retunes";
  return h;
}

std::string csv_row(const ScenarioResult& r) {
  const auto& c = r.config;
  std::string s = std::to_string(c.num_channels) + ',' +
                  std::to_string(c.channel_rate.bits_per_second / 1'000'000'000) + ',' +
                  std::to_string(c.tuning_time.count()) + ',' + fixed2(c.load_fraction * 100.0) +
                  ',' + fixed2(c.sla_share * 100.0) + ',' + std::to_string(r.base_seed) + ',';
  if (!r.ok()) return s + ",,,,";
  return s + fixed2(r.compliance_pct) + ',' + std::to_string(r.breach_events) + ',' +
         std::to_string(std::llround(r.sla_delay.mean_ns)) + ',' +
         std::to_string(r.sla_delay.p99_ns) + ',' + std::to_string(r.retunes);
}

void write_csv(std::ostream& os, const std::vector<ScenarioResult>& results) {
  os << csv_header() << '\n';
  for (const auto& r : results) os << csv_row(r) << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvError("empty sweep file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw CsvError("unexpected header: " + line);

  std::vector<SweepRow> rows;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 11) throw CsvError("line " + std::to_string(n) + ": expected 11 columns");
    SweepRow r;
    r.num_channels = parse_number<int>(cells[0], n);
    r.channel_rate_gbps = parse_number<std::int64_t>(cells[1], n);
    r.tuning_time_ns = parse_number<std::int64_t>(cells[2], n);
    r.load_pct = parse_number<double>(cells[3], n);
    r.sla_share_pct = parse_number<double>(cells[4], n);
    r.seed = parse_number<std::uint64_t>(cells[5], n);
    if (!cells[6].empty()) r.compliance_pct = parse_number<double>(cells[6], n);
    rows.push_back(r);
  }
  return rows;
}

std::string Series::label() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%dx%lldG load %g%%", num_channels,
                static_cast<long long>(channel_rate_gbps), load_pct);
  return buf;
}

std::vector<Series> figure_series(const std::vector<SweepRow>& rows, std::int64_t tuning_ns) {
  struct Acc {
    double sum = 0.0;
    int n = 0;
  };
  std::vector<Series> series;
  std::vector<std::map<double, Acc>> acc;
  for (const auto& r : rows) {
    if (r.tuning_time_ns != tuning_ns || !r.compliance_pct) continue;
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) {
      return s.num_channels == r.num_channels && s.channel_rate_gbps == r.channel_rate_gbps &&
             s.load_pct == r.load_pct;
    });
    if (it == series.end()) {
      series.push_back({r.num_channels, r.channel_rate_gbps, r.load_pct, {}});
      acc.emplace_back();
      it = series.end() - 1;
    }
    auto& a = acc[static_cast<std::size_t>(it - series.begin())][r.sla_share_pct];
    a.sum += *r.compliance_pct;
    ++a.n;
  }
  if (series.empty())
    throw CsvError("sweep has no results for tuning time " + std::to_string(tuning_ns) + " ns");
  for (std::size_t i = 0; i < series.size(); ++i)
    for (const auto& [share, a] : acc[i]) series[i].points.emplace_back(share, a.sum / a.n);
  return series;
}

void write_figure_csv(std::ostream& os, const std::vector<Series>& series) {
  std::map<double, std::vector<std::optional<double>>> table;
  for (std::size_t i = 0; i < series.size(); ++i)
    for (const auto& [x, y] : series[i].points) {
      auto& row = table[x];
      row.resize(series.size());
      row[i] = y;
    }
  os << "sla_share_pct";
  for (const auto& s : series) os << ',' << s.label();
  os << '\n';
  for (auto& [x, ys] : table) {
    ys.resize(series.size());
    os << fixed2(x);
    for (const auto& y : ys) os << ',' << (y ? fixed2(*y) : std::string());
    os << '\n';
  }
}

void write_gnuplot(std::ostream& os, const std::vector<Series>& series, std::int64_t tuning_ns) {
  os << "# compliance vs SLA share, tuning time " << tuning_ns << " ns\n";
  os << "# one block per series; plot with `index i`\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i > 0) os << "\n\n";
    os << "# [" << i << "] " << series[i].label() << '\n';
    for (const auto& [x, y] : series[i].points) os << fixed2(x) << ' ' << fixed2(y) << '\n';
  }
}

}  // namespace twdm::cli
