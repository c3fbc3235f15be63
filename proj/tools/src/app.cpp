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

#include "twdm/cli/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "twdm/cli/report.hpp"
#include "twdm/exact_oracle.hpp"
#include "twdm/invariants.hpp"
#include "twdm/rng.hpp"

namespace twdm::cli {
namespace {

namespace fs = std::filesystem;

struct RunArgs {
  std::vector<std::string> channels{"8x25"};
  std::vector<std::int64_t> tuning_ns{0};
  std::vector<double> load_pct{20.0};
  std::vector<double> share_pct{50.0};
  std::string sweep;
  std::uint64_t seed = 1;
  std::string seeds;
  int jobs = 1;
  std::string out;
  bool check_invariants = false;
  bool fault = false;
  ScenarioConfig base;
  double low_latency_pct = 50.0;
};

struct FigureArgs {
  std::int64_t tuning_ns = 0;
  std::string in;
  std::string out_dir;
};

struct VerifyArgs {
  int instances = 100;
  std::uint64_t seed = 1;
  std::int64_t frames = 400;
  int jobs = 1;
  bool fault = false;
};

void add_run_options(CLI::App& cmd, RunArgs& a, std::map<std::string, CLI::Option*>& opts) {
  opts["channels"] = cmd.add_option("--channels", a.channels, "channel configs NxR, R in Gb/s")
                         ->delimiter(',');
  opts["tuning"] = cmd.add_option("--tuning", a.tuning_ns, "tuning times in ns")->delimiter(',');
  opts["load"] = cmd.add_option("--load", a.load_pct, "offered load, % of capacity")->delimiter(',');
  opts["sla-share"] =
      cmd.add_option("--sla-share", a.share_pct, "SLA share of the load, %")->delimiter(',');
  cmd.add_option("--sweep", a.sweep, "named grid")->check(CLI::IsMember({"paper"}));
  cmd.add_option("--frames", a.base.num_frames, "frames per scenario")
      ->check(CLI::NonNegativeNumber);
  opts["seed"] = cmd.add_option("--seed", a.seed, "base seed");
  opts["seeds"] = cmd.add_option("--seeds", a.seeds, "seed list, N or A..B");
  cmd.add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--out", a.out, "CSV path, '-' for stdout");
  cmd.add_option("--onus-per-vno", a.base.onus_per_vno)->check(CLI::PositiveNumber);
  cmd.add_option("--flows-per-onu", a.base.flows_per_onu)->check(CLI::PositiveNumber);
  cmd.add_option("--transceivers-per-onu", a.base.transceivers_per_onu)
      ->check(CLI::PositiveNumber);
  cmd.add_option("--low-latency-share", a.low_latency_pct,
                 "% of SLA flows in the 12.5 us class")
      ->check(CLI::Range(0.0, 100.0));
  cmd.add_option("--timeline", a.base.timeline)
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, VirtualTimeline>{{"single", VirtualTimeline::kSingle},
                                                 {"full-capacity", VirtualTimeline::kFullCapacity}},
          CLI::ignore_case));
  cmd.add_option("--sort", a.base.sort_mode)
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, SortMode>{
              {"closest-to-breach", SortMode::kClosestToBreach},
              {"literal-rate-ascending", SortMode::kLiteralRateAscending}},
          CLI::ignore_case));
  cmd.add_option("--window", a.base.window_mode)
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, WindowMode>{{"sliding", WindowMode::kSliding},
                                            {"tumbling", WindowMode::kTumbling}},
          CLI::ignore_case));
  cmd.add_flag("--check-invariants", a.check_invariants, "re-check every frame");
  cmd.add_flag("--fault-inject", a.fault)->group("");
}

std::vector<SweepPoint> build_points(const RunArgs& a,
                                     const std::map<std::string, CLI::Option*>& opts) {
  SweepGrid grid;
  grid.base = a.base;
  grid.base.low_latency_class_share = a.low_latency_pct / 100.0;
  const bool full_grid = a.sweep == "paper";
  auto given = [&](const char* name) { return opts.at(name)->count() > 0; };

  if (!full_grid || given("channels")) {
    grid.channel_configs.clear();
    for (const auto& c : a.channels) grid.channel_configs.push_back(parse_channel_config(c));
  }
  if (!full_grid || given("tuning")) {
    grid.tuning_times.clear();
    for (auto t : a.tuning_ns) {
      if (t < 0) throw ConfigError("tuning time must be >= 0");
      grid.tuning_times.emplace_back(t);
    }
  }
  if (!full_grid || given("load")) {
    grid.loads.clear();
    for (double l : a.load_pct) grid.loads.push_back(l / 100.0);
  }
  if (!full_grid || given("sla-share")) {
    grid.sla_shares.clear();
    for (double s : a.share_pct) grid.sla_shares.push_back(s / 100.0);
  }
  grid.seeds = given("seeds") ? parse_seed_range(a.seeds) : std::vector<std::uint64_t>{a.seed};

  auto points = enumerate(grid);
  for (const auto& p : points) p.config.validate();
  return points;
}

int write_text(const std::string& path, const std::string& text, std::ostream& out,
               std::ostream& err) {
  if (path == "-") {
    out << text;
    return 0;
  }
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary);
  f << text;
  f.close();
  if (!f) {
    err << "error: cannot write " << path << '\n';
    return 3;
  }
  return 0;
}

int cmd_run(const RunArgs& a, const std::map<std::string, CLI::Option*>& opts, std::ostream& out,
            std::ostream& err) {
  std::vector<SweepPoint> points;
  try {
    points = build_points(a, opts);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  RunOptions ro;
  ro.check_invariants = a.check_invariants || a.fault;
  ro.fault = a.fault ? FaultInjection::kForceOverlap : FaultInjection::kNone;
  const auto results = run_points(points, a.jobs, ro);

  std::ostringstream csv;
  write_csv(csv, results);
  const std::string path = a.out.empty() ? (fs::path(default_output_dir()) / "results.csv").string()
                                         : a.out;
  if (int rc = write_text(path, csv.str(), out, err); rc != 0) return rc;

  int failed = 0;
  int violated = 0;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++failed;
      err << "error: scenario " << csv_row(r) << " failed: " << r.error << '\n';
    }
    if (r.invariants && !r.invariants->ok()) {
      ++violated;
      for (const auto& m : r.invariants->messages) err << "invariant: " << m << '\n';
    }
  }
  if (path != "-") out << "wrote " << results.size() << " rows to " << path << '\n';
  return failed || violated ? 1 : 0;
}

int cmd_figure(const FigureArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.in);
  if (!in) {
    err << "error: cannot read " << a.in << '\n';
    return 2;
  }
  std::vector<Series> series;
  try {
    series = figure_series(read_sweep_csv(in), a.tuning_ns);
  } catch (const CsvError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const fs::path dir = a.out_dir.empty() ? fs::path(default_output_dir()) : fs::path(a.out_dir);
  const std::string stem = "figure_tuning_" + std::to_string(a.tuning_ns);
  std::ostringstream csv, dat;
  write_figure_csv(csv, series);
  write_gnuplot(dat, series, a.tuning_ns);
  if (int rc = write_text((dir / (stem + ".csv")).string(), csv.str(), out, err)) return rc;
  if (int rc = write_text((dir / (stem + ".dat")).string(), dat.str(), out, err)) return rc;
  out << series.size() << " series for tuning time " << a.tuning_ns << " ns\n";
  for (const auto& s : series) out << "  " << s.label() << ": " << s.points.size() << " points\n";
  out << "wrote " << (dir / (stem + ".csv")).string() << " and " << (dir / (stem + ".dat")).string()
      << '\n';
  return 0;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  bool all_ok = true;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    all_ok = all_ok && ok;
  };

  InstanceShape shape;
  shape.max_allocations = kOracleMaxAllocations;
  shape.max_slots = kOracleMaxSlots;
  int zero = 0;
  int errors = 0;
  std::string first_error;
  for (int i = 0; i < a.instances; ++i) {
    try {
      const auto inst = random_instance(hash_combine(a.seed, static_cast<std::uint64_t>(i)), shape);
      const auto exact = solve_exact(inst);
      if (!AssignmentMatrix(inst, exact.assignment).satisfies_constraints())
        throw std::logic_error("exact assignment breaks the slot constraints");
      const auto gap = heuristic_gap(inst, ScenarioConfig{});
      if (gap.zero_gap()) ++zero;
    } catch (const std::exception& e) {
      if (errors++ == 0) first_error = "instance " + std::to_string(i) + ": " + e.what();
    }
  }
  report(errors == 0, "oracle admissibility",
         std::to_string(a.instances) + " instances, heuristic >= exact on " +
             std::to_string(a.instances - errors) + (errors ? "; " + first_error : std::string()));
  report(2 * zero >= a.instances, "oracle gap",
         "zero gap on " + std::to_string(zero) + " of " + std::to_string(a.instances));

  ScenarioConfig base;
  base.num_frames = a.frames;
  base.load_fraction = 0.8;
  base.sla_share = 0.7;
  std::vector<SweepPoint> points;
  for (ChannelConfig cc : {ChannelConfig{8, 25}, ChannelConfig{4, 50}, ChannelConfig{1, 200}})
    for (auto t : {0ns, 1'000ns, 15'000ns})
      points.push_back(make_point(base, cc, t, base.load_fraction, base.sla_share, a.seed));
  RunOptions ro;
  ro.check_invariants = true;
  ro.fault = a.fault ? FaultInjection::kForceOverlap : FaultInjection::kNone;
  InvariantReport total;
  std::string failures;
  for (const auto& r : run_points(points, a.jobs, ro)) {
    if (!r.ok()) failures += " " + r.error + ";";
    if (r.invariants) total.merge(*r.invariants);
  }
  std::string detail = std::to_string(points.size()) + " scenarios, " +
                       std::to_string(total.grants_checked) + " grants checked";
  if (!total.ok()) detail += "; " + std::to_string(total.violations()) + " violations, first: " +
                             total.messages.front();
  if (!failures.empty()) detail += "; failed:" + failures;
  report(total.ok() && failures.empty(), "feasibility invariants", detail);
  return all_ok ? 0 : 1;
}

}  // namespace

ChannelConfig parse_channel_config(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos || x == 0 || x + 1 == text.size())
    throw ConfigError("channel config must look like NxR, got '" + text + "'");
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v <= 0) throw ConfigError("bad number in channel config '" + text + "'");
    return v;
  };
  std::string rate = text.substr(x + 1);
  if (!rate.empty() && (rate.back() == 'G' || rate.back() == 'g')) rate.pop_back();
  return {static_cast<int>(number(text.substr(0, x))), number(rate)};
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  auto number = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("bad seed list '" + text + "'");
    return std::stoull(s);
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) return {number(text)};
  const auto lo = number(text.substr(0, dots));
  const auto hi = number(text.substr(dots + 2));
  if (hi < lo) throw ConfigError("empty seed range '" + text + "'");
  if (hi - lo >= 1'000'000) throw ConfigError("seed range too long '" + text + "'");
  std::vector<std::uint64_t> seeds;
  for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

std::string default_output_dir() {
  const char* env = std::getenv("TWDM_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"TWDM-PON bandwidth map merging simulator", "twdm-sim"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file, one [run] / [figure] / [verify] section of key = value "
                 "lines; command-line flags win");

  RunArgs run_args;
  std::map<std::string, CLI::Option*> run_opts;
  auto* run = app.add_subcommand("run", "simulate one scenario or a sweep, write CSV");
  add_run_options(*run, run_args, run_opts);

  FigureArgs fig;
  auto* figure = app.add_subcommand("figure", "compliance-vs-SLA-share series for one tuning time");
  figure->add_option("--tuning", fig.tuning_ns, "tuning time in ns")->required();
  figure->add_option("--in", fig.in, "sweep CSV written by run")->required();
  figure->add_option("--out-dir", fig.out_dir, "output directory");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "oracle gap suite and feasibility invariants");
  verify->add_option("--instances", ver.instances, "random oracle instances")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", ver.seed);
  verify->add_option("--frames", ver.frames, "frames per invariant scenario")
      ->check(CLI::PositiveNumber);
  verify->add_option("--jobs", ver.jobs)->check(CLI::PositiveNumber);
  verify->add_flag("--fault-inject", ver.fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (run->parsed()) return cmd_run(run_args, run_opts, out, err);
  if (figure->parsed()) return cmd_figure(fig, out, err);
  return cmd_verify(ver, out);
}

}  // namespace twdm::cli
