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

#ifndef TWDM_CLI_APP_HPP_
#define TWDM_CLI_APP_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "twdm/sim_runner.hpp"

namespace twdm::cli {

// "8x25" -> 8 channels at 25 Gb/s. Throws ConfigError.
ChannelConfig parse_channel_config(const std::string& text);
// "3" -> {3}; "1..5" -> {1, 2, 3, 4, 5}. Throws ConfigError.
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

// $TWDM_OUTPUT_DIR, or the working directory when unset.
std::string default_output_dir();

// Entry point of the twdm-sim binary: subcommands run, figure and verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twdm::cli

#endif  // TWDM_CLI_APP_HPP_
