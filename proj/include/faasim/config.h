// Copyright (c) The FaaSim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAASIM_CONFIG_H_
#define FAASIM_CONFIG_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "faasim/agent.h"
#include "faasim/host.h"

namespace faasim {

// Everything one experiment needs; file values override the defaults.
struct ExperimentConfig {
  HostConfig host;    // [host]
  AgentConfig agent;  // [agent]
  double explore_hi = 5.0 / 6.0;  // [agent]
  double explore_lo = 1.0 / 101.0;

  // [workload]
  std::vector<std::string> apps;  // catalog ids; empty selects all
  std::string catalog_path;       // optional custom catalog file
  uint64_t workload_seed = 42;

  // [experiment]
  std::string controller = "lass";
  int partition_ls = 0;  // 0 lets the partition baseline pick ceil(n/2)
  int partition_ld = 0;
  int fixed_priority = 80;
  int priority_step = 10;
  double calibration_horizon = 200;
  std::string checkpoint;
};

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& msg, int line)
      : std::runtime_error("config line " + std::to_string(line) + ": " + msg),
        line_no(line) {}
  int line_no;
};

// "key = value" lines grouped under [host] / [agent] / [workload] /
// [experiment]; '#' starts a comment.  Unknown sections or keys, malformed
// values, and text outside any section all raise ConfigError.
ExperimentConfig ParseConfigText(const std::string& text);
ExperimentConfig LoadConfigFile(const std::string& path);

}  // namespace faasim

#endif  // FAASIM_CONFIG_H_
