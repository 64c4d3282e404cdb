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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "faasim/experiment.h"
#include "oracles.h"

using namespace faasim;

namespace {

std::string Slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text parses every section") {
  const char* text = R"(
# full-surface config
[host]
num_cores = 4
horizon = 123.5
window = 2.5
rr_slice = 0.2
other_tick = 0.005
cold_start_delay = 0.25
rho_target = 0.8
max_procs_per_app = 9
prewarm = false
autoscale_observed = 0
rate_window = 20
queue_capacity = 64
sidecar_noise = true
sidecar_wake = 0.0002
itlb_enabled = 1
k_miss = 8
penalty_cycles = 50
clock_hz = 2.5e9
futex_enabled = false
locked_fraction = 0.4
background_tasks = 3
background_storm_rate = 2.5
background_storm_width = 2
background_burst = 0.01
background_footprint = 128
seed = 99
audit = true

[agent]
alpha = 0.001
gamma = 0.95
epsilon = 0.2
p_step = 5
a_step = 1
reward_a = 500
reward_b = 50
reward_c = 750
tau = 0.6
hidden = 32
seed = 7
explore_hi = 0.9
explore_lo = 0.05

[workload]
apps = imgscale, thumbgen
seed = 1337

[experiment]
controller = faasched
partition_ls = 2
partition_ld = 2
fixed_priority = 70
priority_step = 15
calibration_horizon = 50
checkpoint = my.ckpt
)";
  ExperimentConfig cfg = ParseConfigText(text);
  CHECK(cfg.host.num_cores == 4);
  CHECK(cfg.host.horizon == 123.5);
  CHECK(cfg.host.window == 2.5);
  CHECK(cfg.host.rr_slice == 0.2);
  CHECK(cfg.host.other_tick == 0.005);
  CHECK(cfg.host.cold_start_delay == 0.25);
  CHECK(cfg.host.rho_target == 0.8);
  CHECK(cfg.host.max_procs_per_app == 9);
  CHECK(!cfg.host.prewarm);
  CHECK(!cfg.host.autoscale_observed);
  CHECK(cfg.host.rate_window == 20);
  CHECK(cfg.host.queue_capacity == 64);
  CHECK(cfg.host.sidecar_noise);
  CHECK(cfg.host.sidecar_wake == 0.0002);
  CHECK(cfg.host.itlb_enabled);
  CHECK(cfg.host.k_miss == 8);
  CHECK(cfg.host.penalty_cycles == 50);
  CHECK(cfg.host.clock_hz == 2.5e9);
  CHECK(!cfg.host.futex_enabled);
  CHECK(cfg.host.locked_fraction == 0.4);
  CHECK(cfg.host.background_tasks == 3);
  CHECK(cfg.host.background_storm_rate == 2.5);
  CHECK(cfg.host.background_storm_width == 2);
  CHECK(cfg.host.background_burst == 0.01);
  CHECK(cfg.host.background_footprint == 128);
  CHECK(cfg.host.seed == 99);
  CHECK(cfg.host.audit);
  CHECK(cfg.agent.alpha == 0.001);
  CHECK(cfg.agent.gamma == 0.95);
  CHECK(cfg.agent.epsilon == 0.2);
  CHECK(cfg.agent.p_step == 5);
  CHECK(cfg.agent.a_step == 1);
  CHECK(cfg.agent.reward_a == 500);
  CHECK(cfg.agent.reward_b == 50);
  CHECK(cfg.agent.reward_c == 750);
  CHECK(cfg.agent.tau == 0.6);
  CHECK(cfg.agent.hidden == 32);
  CHECK(cfg.agent.seed == 7);
  CHECK(cfg.explore_hi == 0.9);
  CHECK(cfg.explore_lo == 0.05);
  REQUIRE(cfg.apps.size() == 2);
  CHECK(cfg.apps[0] == "imgscale");
  CHECK(cfg.apps[1] == "thumbgen");
  CHECK(cfg.workload_seed == 1337);
  CHECK(cfg.controller == "faasched");
  CHECK(cfg.partition_ls == 2);
  CHECK(cfg.partition_ld == 2);
  CHECK(cfg.fixed_priority == 70);
  CHECK(cfg.priority_step == 15);
  CHECK(cfg.calibration_horizon == 50);
  CHECK(cfg.checkpoint == "my.ckpt");
}

TEST_CASE("config errors carry the offending line number") {
  auto line_of = [](const char* text) {
    try {
      ParseConfigText(text);
    } catch (const ConfigError& e) {
      return e.line_no;
    }
    return -1;
  };
  CHECK(line_of("[host]\nnum_cores = 4\nbogus_key = 1\n") == 3);
  CHECK(line_of("[badsection]\n") == 1);
  CHECK(line_of("num_cores = 4\n") == 1);  // key before any section
  CHECK(line_of("[host]\nnum_cores = four\n") == 2);
  CHECK(line_of("[host]\nnum_cores 4\n") == 2);  // missing '='
  CHECK(line_of("[host]\nprewarm = maybe\n") == 2);
  CHECK(line_of("\n\n[host]\n\nhorizon = \n") == 5);
  CHECK(ParseConfigText("# nothing but comments\n\n").host.num_cores == 6);
}

TEST_CASE("spec selection honors the app list") {
  ExperimentConfig cfg;
  std::vector<FunctionSpec> all = SelectSpecs(cfg);
  CHECK(all.size() == BuiltinCatalog().size());

  cfg.apps = {all[3].id, all[0].id};
  std::vector<FunctionSpec> two = SelectSpecs(cfg);
  REQUIRE(two.size() == 2);
  CHECK(two[0].id == all[3].id);  // selection preserves the asked order
  CHECK(two[1].id == all[0].id);

  cfg.apps = {"no-such-app"};
  CHECK_THROWS_AS(SelectSpecs(cfg), std::invalid_argument);
}

TEST_CASE("doubles survive the shortest-form text round trip") {
  std::vector<double> cases{0.0,    1.0,      -1.0,       0.1,
                            1e-300, 1.7e308,  3.14159265, 1.0 / 3.0,
                            9e9,    0.125,    -2.5e-7,    42.0};
  for (double v : cases) {
    std::string s = FormatDouble(v);
    double back = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(ec == std::errc());
    CHECK(p == s.data() + s.size());
    CHECK(back == v);
  }
}

TEST_CASE("solo calibration recovers the isolated service time") {
  ExperimentConfig cfg;
  cfg.host.num_cores = 6;
  cfg.calibration_horizon = 400;
  cfg.workload_seed = 5;
  // Isolated and uncontended: execution latency is the service draw itself.
  cfg.host.sidecar_noise = false;
  cfg.host.itlb_enabled = false;
  cfg.host.futex_enabled = false;

  std::vector<FunctionSpec> specs = SelectSpecs(cfg);
  specs.resize(2);
  Calibration cal = Calibrate(cfg, specs);
  REQUIRE(cal.apps.size() == 2);
  for (size_t i = 0; i < specs.size(); ++i) {
    const AppCalibration& a = cal.apps[i];
    CHECK(a.id == specs[i].id);
    CHECK(a.completions > 100);
    CHECK(oracle::RelErr(a.exec_mean, specs[i].mean_service_time) < 0.15);
    CHECK(a.resp_mean >= a.exec_mean - 1e-12);
    CHECK(a.slowdown_mean == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.cont_mean[2] == 0);  // no address-space competition alone
  }
  CHECK(cal.bounds.num_cores == 6);
  CHECK(cal.bounds.pcount_max == cfg.host.max_procs_per_app);

  std::vector<FunctionSpec> specs2 = specs;
  ApplyBaselines(&specs2, cal);
  CHECK(specs2[0].isolated_contention_baseline[0] == cal.apps[0].cont_mean[0]);

  std::string path = "cal_roundtrip.tmp";
  SaveCalibration(cal, path);
  Calibration back = LoadCalibration(path);
  std::remove(path.c_str());
  REQUIRE(back.apps.size() == cal.apps.size());
  for (size_t i = 0; i < cal.apps.size(); ++i) {
    CHECK(back.apps[i].id == cal.apps[i].id);
    CHECK(back.apps[i].exec_mean == cal.apps[i].exec_mean);
    CHECK(back.apps[i].exec_var == cal.apps[i].exec_var);
    CHECK(back.apps[i].exec_iqr == cal.apps[i].exec_iqr);
    CHECK(back.apps[i].resp_mean == cal.apps[i].resp_mean);
    CHECK(back.apps[i].resp_var == cal.apps[i].resp_var);
    CHECK(back.apps[i].resp_iqr == cal.apps[i].resp_iqr);
    CHECK(back.apps[i].cont_mean == cal.apps[i].cont_mean);
    CHECK(back.apps[i].slowdown_mean == cal.apps[i].slowdown_mean);
    CHECK(back.apps[i].completions == cal.apps[i].completions);
  }
  CHECK(back.bounds.cont_hi == cal.bounds.cont_hi);
  CHECK(back.bounds.pcount_max == cal.bounds.pcount_max);
  CHECK(back.bounds.num_cores == cal.bounds.num_cores);

  CHECK_THROWS(LoadCalibration("missing_calibration.tmp"));
}

TEST_CASE("runs are deterministic end to end, byte for byte") {
  ExperimentConfig cfg;
  cfg.host.horizon = 60;
  cfg.host.num_cores = 3;
  cfg.controller = "rid";
  std::vector<FunctionSpec> specs = SelectSpecs(cfg);
  specs.resize(3);

  namespace fs = std::filesystem;
  fs::create_directories("det_a");
  fs::create_directories("det_b");
  for (const std::string& dir : {std::string("det_a"), std::string("det_b")}) {
    RunOutputs out = RunWithController(cfg, specs, nullptr);
    WriteRequestsCsv(out.result, specs, dir + "/requests.csv");
    WriteWindowsCsv(out.result, dir + "/windows.csv");
    WriteSummaryCsv(out.result, specs, nullptr, dir + "/summary.csv");
  }
  CHECK(Slurp("det_a/requests.csv") == Slurp("det_b/requests.csv"));
  CHECK(Slurp("det_a/windows.csv") == Slurp("det_b/windows.csv"));
  CHECK(Slurp("det_a/summary.csv") == Slurp("det_b/summary.csv"));
  CHECK(Slurp("det_a/requests.csv").find("cold_start") != std::string::npos);
  fs::remove_all("det_a");
  fs::remove_all("det_b");
}

TEST_CASE("unknown controllers and missing checkpoints are rejected") {
  ExperimentConfig cfg;
  cfg.host.horizon = 10;
  std::vector<FunctionSpec> specs = SelectSpecs(cfg);
  specs.resize(1);
  cfg.controller = "quantum";
  CHECK_THROWS_AS(RunWithController(cfg, specs, nullptr),
                  std::invalid_argument);
  cfg.controller = "faasched";
  CHECK_THROWS_AS(RunWithController(cfg, specs, nullptr),
                  std::invalid_argument);
}

TEST_CASE("report rendering digests a finished run directory") {
  ExperimentConfig cfg;
  cfg.host.horizon = 60;
  cfg.host.num_cores = 2;
  cfg.controller = "lass";
  std::vector<FunctionSpec> specs = SelectSpecs(cfg);
  specs.resize(3);

  namespace fs = std::filesystem;
  fs::create_directories("rep_dir");
  RunOutputs out = RunWithController(cfg, specs, nullptr);
  WriteWindowsCsv(out.result, "rep_dir/windows.csv");
  WriteSummaryCsv(out.result, specs, nullptr, "rep_dir/summary.csv");

  std::string text = BuildReport("rep_dir");
  CHECK(text.find("fairness") != std::string::npos);
  CHECK(text.find("Pearson") != std::string::npos);
  CHECK(text.find(specs[0].id) != std::string::npos);
  CHECK(text.find("latency summary") != std::string::npos);
  fs::remove_all("rep_dir");

  CHECK_THROWS(BuildReport("no_such_dir"));
}
