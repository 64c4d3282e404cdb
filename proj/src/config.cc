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

#include "faasim/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace faasim {
namespace {

std::string Trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string& v, int line) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError("expected a number, got '" + v + "'", line);
  return x;
}

int64_t ToInt(const std::string& v, int line) {
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError("expected an integer, got '" + v + "'", line);
  return x;
}

bool ToBool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true/false, got '" + v + "'", line);
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void SetHost(HostConfig* h, const std::string& k, const std::string& v,
             int line) {
  if (k == "num_cores") h->num_cores = static_cast<int>(ToInt(v, line));
  else if (k == "horizon") h->horizon = ToDouble(v, line);
  else if (k == "window") h->window = ToDouble(v, line);
  else if (k == "rr_slice") h->rr_slice = ToDouble(v, line);
  else if (k == "other_tick") h->other_tick = ToDouble(v, line);
  else if (k == "cold_start_delay") h->cold_start_delay = ToDouble(v, line);
  else if (k == "rho_target") h->rho_target = ToDouble(v, line);
  else if (k == "max_procs_per_app")
    h->max_procs_per_app = static_cast<int>(ToInt(v, line));
  else if (k == "prewarm") h->prewarm = ToBool(v, line);
  else if (k == "autoscale_observed") h->autoscale_observed = ToBool(v, line);
  else if (k == "rate_window") h->rate_window = ToDouble(v, line);
  else if (k == "queue_capacity")
    h->queue_capacity = static_cast<int>(ToInt(v, line));
  else if (k == "sidecar_noise") h->sidecar_noise = ToBool(v, line);
  else if (k == "sidecar_wake") h->sidecar_wake = ToDouble(v, line);
  else if (k == "itlb_enabled") h->itlb_enabled = ToBool(v, line);
  else if (k == "k_miss") h->k_miss = ToDouble(v, line);
  else if (k == "penalty_cycles") h->penalty_cycles = ToDouble(v, line);
  else if (k == "clock_hz") h->clock_hz = ToDouble(v, line);
  else if (k == "futex_enabled") h->futex_enabled = ToBool(v, line);
  else if (k == "locked_fraction") h->locked_fraction = ToDouble(v, line);
  else if (k == "background_tasks")
    h->background_tasks = static_cast<int>(ToInt(v, line));
  else if (k == "background_storm_rate")
    h->background_storm_rate = ToDouble(v, line);
  else if (k == "background_storm_width")
    h->background_storm_width = static_cast<int>(ToInt(v, line));
  else if (k == "background_burst") h->background_burst = ToDouble(v, line);
  else if (k == "background_footprint")
    h->background_footprint = ToDouble(v, line);
  else if (k == "seed") h->seed = static_cast<uint64_t>(ToInt(v, line));
  else if (k == "audit") h->audit = ToBool(v, line);
  else if (k == "trace_path") h->trace_path = v;
  else throw ConfigError("unknown [host] key '" + k + "'", line);
}

void SetAgent(ExperimentConfig* c, const std::string& k, const std::string& v,
              int line) {
  AgentConfig* a = &c->agent;
  if (k == "alpha") a->alpha = ToDouble(v, line);
  else if (k == "gamma") a->gamma = ToDouble(v, line);
  else if (k == "epsilon") a->epsilon = ToDouble(v, line);
  else if (k == "p_step") a->p_step = static_cast<int>(ToInt(v, line));
  else if (k == "a_step") a->a_step = static_cast<int>(ToInt(v, line));
  else if (k == "reward_a") a->reward_a = ToDouble(v, line);
  else if (k == "reward_b") a->reward_b = ToDouble(v, line);
  else if (k == "reward_c") a->reward_c = ToDouble(v, line);
  else if (k == "tau") a->tau = ToDouble(v, line);
  else if (k == "hidden") a->hidden = static_cast<int>(ToInt(v, line));
  else if (k == "seed") a->seed = static_cast<uint64_t>(ToInt(v, line));
  else if (k == "explore_hi") c->explore_hi = ToDouble(v, line);
  else if (k == "explore_lo") c->explore_lo = ToDouble(v, line);
  else throw ConfigError("unknown [agent] key '" + k + "'", line);
}

void SetWorkload(ExperimentConfig* c, const std::string& k,
                 const std::string& v, int line) {
  if (k == "apps") c->apps = SplitList(v);
  else if (k == "catalog") c->catalog_path = v;
  else if (k == "seed") c->workload_seed = static_cast<uint64_t>(ToInt(v, line));
  else throw ConfigError("unknown [workload] key '" + k + "'", line);
}

void SetExperiment(ExperimentConfig* c, const std::string& k,
                   const std::string& v, int line) {
  if (k == "controller") c->controller = v;
  else if (k == "partition_ls")
    c->partition_ls = static_cast<int>(ToInt(v, line));
  else if (k == "partition_ld")
    c->partition_ld = static_cast<int>(ToInt(v, line));
  else if (k == "fixed_priority")
    c->fixed_priority = static_cast<int>(ToInt(v, line));
  else if (k == "priority_step")
    c->priority_step = static_cast<int>(ToInt(v, line));
  else if (k == "calibration_horizon")
    c->calibration_horizon = ToDouble(v, line);
  else if (k == "checkpoint") c->checkpoint = v;
  else throw ConfigError("unknown [experiment] key '" + k + "'", line);
}

}  // namespace

ExperimentConfig ParseConfigText(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string s = Trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section", line);
      section = Trim(s.substr(1, s.size() - 2));
      if (section != "host" && section != "agent" && section != "workload" &&
          section != "experiment")
        throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", line);
    std::string key = Trim(s.substr(0, eq));
    std::string val = Trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (section.empty())
      throw ConfigError("key '" + key + "' outside any section", line);
    if (section == "host") SetHost(&cfg.host, key, val, line);
    else if (section == "agent") SetAgent(&cfg, key, val, line);
    else if (section == "workload") SetWorkload(&cfg, key, val, line);
    else SetExperiment(&cfg, key, val, line);
  }
  return cfg;
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return ParseConfigText(buf.str());
}

}  // namespace faasim
