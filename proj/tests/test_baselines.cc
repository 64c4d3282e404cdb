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

#include <stdexcept>
#include <vector>

#include "faasim/baselines.h"
#include "faasim/workload.h"

using namespace faasim;

namespace {

FunctionSpec MakeSpec(const std::string& id, LatencyClass cat, double mu,
                      double lambda) {
  FunctionSpec s;
  s.id = id;
  s.category = cat;
  s.mean_service_time = mu;
  s.arrival_rate = lambda;
  return s;
}

bool SameRecords(const std::vector<RequestRecord>& a,
                 const std::vector<RequestRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].app != b[i].app || a[i].arrival != b[i].arrival ||
        a[i].start_exec != b[i].start_exec ||
        a[i].completion != b[i].completion)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("the step schemes ratchet and saturate") {
  SUBCASE("increase walks up and pins at 99") {
    int p = 0;
    std::vector<int> seen;
    for (int i = 0; i < 12; ++i) {
      p = NextPriority(PriorityScheme::kStepIncrease, p, 10, 0, nullptr);
      seen.push_back(p);
    }
    CHECK(seen[0] == 10);
    CHECK(seen[1] == 20);
    CHECK(seen[8] == 90);
    CHECK(seen[9] == 99);  // capped, not 100
    CHECK(seen[11] == 99);
  }
  SUBCASE("decrease walks down and pins at 1") {
    int p = 95;
    std::vector<int> seen;
    for (int i = 0; i < 12; ++i) {
      p = NextPriority(PriorityScheme::kStepDecrease, p, 10, 0, nullptr);
      seen.push_back(p);
    }
    CHECK(seen[0] == 85);
    CHECK(seen[7] == 15);
    CHECK(seen[8] == 5);
    CHECK(seen[9] == 1);  // floored, not -5
    CHECK(seen[11] == 1);
  }
  SUBCASE("fixed pins to the given value and validates it") {
    CHECK(NextPriority(PriorityScheme::kFixed, 37, 10, 80, nullptr) == 80);
    CHECK(NextPriority(PriorityScheme::kFixed, 80, 10, 80, nullptr) == 80);
    CHECK_THROWS_AS(NextPriority(PriorityScheme::kFixed, 5, 10, 0, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(NextPriority(PriorityScheme::kFixed, 5, 10, 100, nullptr),
                    std::invalid_argument);
  }
  SUBCASE("random delta moves by one step either way, clamped") {
    CounterRng rng(5, 0xba5e);
    bool up = false, down = false;
    int p = 50;
    for (int i = 0; i < 64; ++i) {
      int n = NextPriority(PriorityScheme::kRandomDelta, p, 10, 0, &rng);
      CHECK((n == p + 10 || n == p - 10 || n == 1 || n == 99));
      if (n > p) up = true;
      if (n < p) down = true;
      p = n;
    }
    CHECK(up);
    CHECK(down);
    // Clamping at both rails.
    CounterRng r2(5, 1);
    for (int i = 0; i < 32; ++i) {
      CHECK(NextPriority(PriorityScheme::kRandomDelta, 95, 10, 0, &r2) >= 1);
      CHECK(NextPriority(PriorityScheme::kRandomDelta, 95, 10, 0, &r2) <= 99);
      CHECK(NextPriority(PriorityScheme::kRandomDelta, 5, 10, 0, &r2) >= 1);
    }
  }
  SUBCASE("a non-positive step is rejected") {
    CHECK_THROWS_AS(NextPriority(PriorityScheme::kStepIncrease, 5, 0, 0,
                                 nullptr),
                    std::invalid_argument);
  }
}

TEST_CASE("core partitions cover the machine exactly") {
  PartitionSpec p = PartitionCores(2, 4, 6);
  CHECK(p.ls_mask == 0b000011);
  CHECK(p.ld_mask == 0b111100);
  CHECK((p.ls_mask & p.ld_mask) == 0);
  CHECK((p.ls_mask | p.ld_mask) == 0b111111);

  PartitionSpec q = PartitionCores(1, 1, 2);
  CHECK(q.ls_mask == 0b01);
  CHECK(q.ld_mask == 0b10);

  CHECK_THROWS_AS(PartitionCores(0, 6, 6), std::invalid_argument);
  CHECK_THROWS_AS(PartitionCores(6, 0, 6), std::invalid_argument);
  CHECK_THROWS_AS(PartitionCores(2, 3, 6), std::invalid_argument);
  CHECK_THROWS_AS(PartitionCores(4, 4, 6), std::invalid_argument);
}

TEST_CASE("the stock controller is indistinguishable from none") {
  HostConfig cfg;
  cfg.num_cores = 3;
  cfg.horizon = 60;
  std::vector<FunctionSpec> specs{
      MakeSpec("a", LatencyClass::kSensitive, 0.1, 3.0),
      MakeSpec("b", LatencyClass::kDesired, 0.05, 5.0)};
  auto streams = MakeStreams(specs, 77);

  LassController lass;
  SimResult with = Run(cfg, specs, streams, &lass);
  SimResult without = Run(cfg, specs, streams, nullptr);
  CHECK(SameRecords(with.records, without.records));
  for (const WindowSnapshot& w : with.windows) {
    for (const AppWindow& a : w.apps) {
      CHECK(a.p_id == 0);
      CHECK(a.a_id == 0);
    }
  }
}

TEST_CASE("scheme controllers drive latency-sensitive priorities only") {
  HostConfig cfg;
  cfg.num_cores = 2;
  cfg.horizon = 40;
  cfg.window = 5;
  std::vector<FunctionSpec> specs{
      MakeSpec("ls", LatencyClass::kSensitive, 0.05, 4.0),
      MakeSpec("ld", LatencyClass::kDesired, 0.05, 4.0)};
  auto streams = MakeStreams(specs, 13);

  SUBCASE("fixed priority pins after the first window") {
    SchemeController fp(PriorityScheme::kFixed, 10, 80, 99);
    SimResult res = Run(cfg, specs, streams, &fp);
    REQUIRE(res.windows.size() >= 3);
    // Window snapshots precede the controller's change in their window, so
    // from the second window on the LS app reports the pinned value.
    for (size_t w = 1; w < res.windows.size(); ++w) {
      CHECK(res.windows[w].apps[0].p_id == 80);
      CHECK(res.windows[w].apps[1].p_id == 0);  // LD never touched
    }
  }
  SUBCASE("step increase ratchets window by window") {
    SchemeController si(PriorityScheme::kStepIncrease, 10, 0, 99);
    SimResult res = Run(cfg, specs, streams, &si);
    REQUIRE(res.windows.size() >= 4);
    CHECK(res.windows[1].apps[0].p_id == 10);
    CHECK(res.windows[2].apps[0].p_id == 20);
    CHECK(res.windows[3].apps[0].p_id == 30);
  }
  SUBCASE("step decrease starts from OTHER and floors at 1") {
    SchemeController sd(PriorityScheme::kStepDecrease, 10, 0, 99);
    SimResult res = Run(cfg, specs, streams, &sd);
    REQUIRE(res.windows.size() >= 3);
    // From OTHER (0), one decrease floors straight to 1 and stays.
    for (size_t w = 1; w < res.windows.size(); ++w)
      CHECK(res.windows[w].apps[0].p_id == 1);
  }
  SUBCASE("random delta keeps priorities in range and reproducible") {
    SchemeController r1(PriorityScheme::kRandomDelta, 10, 0, 5);
    SchemeController r2(PriorityScheme::kRandomDelta, 10, 0, 5);
    SimResult a = Run(cfg, specs, streams, &r1);
    SimResult b = Run(cfg, specs, streams, &r2);
    CHECK(SameRecords(a.records, b.records));
    for (size_t w = 1; w < a.windows.size(); ++w) {
      CHECK(a.windows[w].apps[0].p_id >= 1);
      CHECK(a.windows[w].apps[0].p_id <= 99);
      CHECK(a.windows[w].apps[0].p_id == b.windows[w].apps[0].p_id);
    }
  }
}

TEST_CASE("the partition controller pins affinity at start") {
  HostConfig cfg;
  cfg.num_cores = 4;
  cfg.horizon = 40;
  cfg.audit = true;
  std::vector<FunctionSpec> specs{
      MakeSpec("ls1", LatencyClass::kSensitive, 0.05, 4.0),
      MakeSpec("ls2", LatencyClass::kSensitive, 0.08, 3.0),
      MakeSpec("ld1", LatencyClass::kDesired, 0.1, 4.0)};
  auto streams = MakeStreams(specs, 21);

  PartitionController part(PartitionCores(2, 2, 4));
  SimResult res = Run(cfg, specs, streams, &part);
  CHECK(res.records.size() > 100);
  // Partitioning performs no dedication: a_id stays 0 and the run is
  // healthy under audit (ineligible-runner checks included).
  for (const WindowSnapshot& w : res.windows)
    for (const AppWindow& a : w.apps) CHECK(a.a_id == 0);

  // Both halves of the machine executed work: every app completes.
  for (int app = 0; app < 3; ++app) {
    int64_t done = 0;
    for (const WindowSnapshot& w : res.windows) done += w.apps[app].completions;
    CHECK(done > 50);
  }
}
