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

#include <algorithm>
#include <cmath>
#include <vector>

#include "faasim/host.h"
#include "faasim/workload.h"
#include "oracles.h"

using namespace faasim;

namespace {

FunctionSpec MakeSpec(const std::string& id, double mu, double lambda,
                      bool lock = false, double footprint = 0) {
  FunctionSpec s;
  s.id = id;
  s.mean_service_time = mu;
  s.arrival_rate = lambda;
  s.uses_futex_lock = lock;
  s.code_footprint = footprint;
  return s;
}

RequestStream MakeStream(const FunctionSpec& s, uint64_t seed,
                         uint64_t stream) {
  return RequestStream{s.id, s.arrival_rate, s.mean_service_time, seed,
                       stream};
}

// Everything stochastic or noisy switched off; scheduling still on.
HostConfig QuietConfig() {
  HostConfig cfg;
  cfg.sidecar_noise = false;
  cfg.itlb_enabled = false;
  cfg.futex_enabled = false;
  cfg.autoscale_observed = false;
  cfg.window = 5.0;
  return cfg;
}

// Sets fixed policies once at t = 0.
struct StaticPolicy : Controller {
  struct Entry {
    int app, priority, alloc;
  };
  std::vector<Entry> entries;
  void OnStart(HostControl& hc) override {
    for (const Entry& e : entries) {
      EnforceResult r = hc.ApplySchedPolicy(e.app, e.priority, e.alloc);
      REQUIRE(r.applied());
    }
  }
};

double SumWindowField(const SimResult& res, int app,
                      double AppWindow::*field) {
  double s = 0;
  for (const WindowSnapshot& w : res.windows) s += w.apps[app].*field;
  return s;
}

bool SameRecords(const std::vector<RequestRecord>& a,
                 const std::vector<RequestRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].app != b[i].app || a[i].arrival != b[i].arrival ||
        a[i].start_exec != b[i].start_exec ||
        a[i].completion != b[i].completion ||
        a[i].cold_start != b[i].cold_start)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("uncontended executions match drawn demands exactly") {
  HostConfig cfg = QuietConfig();
  cfg.num_cores = 6;
  cfg.horizon = 200;
  std::vector<FunctionSpec> specs{MakeSpec("solo", 0.1, 1.0)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 7, 3)};
  SimResult res = Run(cfg, specs, streams, nullptr);

  std::vector<Arrival> trace = GenerateTrace(1.0, 0.1, 7, 3, cfg.horizon);
  REQUIRE(res.records.size() > 100);
  REQUIRE(res.records.size() <= trace.size());

  std::vector<RequestRecord> by_arrival = res.records;
  std::sort(by_arrival.begin(), by_arrival.end(),
            [](const RequestRecord& x, const RequestRecord& y) {
              return x.arrival < y.arrival;
            });
  for (size_t i = 0; i < by_arrival.size(); ++i) {
    const RequestRecord& r = by_arrival[i];
    CHECK(r.arrival == trace[i].time);
    CHECK(r.execution_latency() ==
          doctest::Approx(trace[i].demand).epsilon(1e-9));
    CHECK(r.start_exec >= r.arrival - 1e-12);
    CHECK(!r.cold_start);
  }
  CHECK(res.totals.cold_starts[0] == 0);
  CHECK(res.totals.dropped[0] == 0);
}

TEST_CASE("single sandbox at rho 0.9 reproduces the M/M/1 mean queue") {
  HostConfig cfg = QuietConfig();
  cfg.num_cores = 2;
  cfg.horizon = 30000;
  cfg.window = 1000;
  std::vector<FunctionSpec> specs{MakeSpec("mm1", 0.125, 7.2)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 11, 5)};
  SimResult res = Run(cfg, specs, streams, nullptr);

  double rho = QueueUtilization(7.2, 0.125, 1);
  CHECK(rho == doctest::Approx(0.9).epsilon(1e-12));
  double want = oracle::MM1MeanInSystem(rho);
  CHECK(oracle::RelErr(res.totals.in_system_avg[0], want) < 0.10);
  double util = res.totals.demand_seconds[0] / cfg.horizon;
  CHECK(util == doctest::Approx(0.9).epsilon(0.02));
}

TEST_CASE("identical seeds replay identical runs; seeds matter") {
  HostConfig cfg;
  cfg.num_cores = 3;
  cfg.horizon = 120;
  cfg.background_tasks = 2;
  cfg.background_storm_width = 1;
  cfg.audit = true;
  std::vector<FunctionSpec> specs{MakeSpec("a", 0.1, 2.0, true, 40),
                                  MakeSpec("b", 0.05, 4.0, false, 60),
                                  MakeSpec("c", 0.2, 1.0, true, 20)};
  auto streams = MakeStreams(specs, 42);
  SimResult r1 = Run(cfg, specs, streams, nullptr);
  SimResult r2 = Run(cfg, specs, streams, nullptr);
  CHECK(SameRecords(r1.records, r2.records));
  REQUIRE(r1.windows.size() == r2.windows.size());
  for (size_t i = 0; i < r1.windows.size(); ++i) {
    CHECK(r1.windows[i].fairness == r2.windows[i].fairness);
    for (size_t a = 0; a < r1.windows[i].apps.size(); ++a) {
      CHECK(r1.windows[i].apps[a].wait == r2.windows[i].apps[a].wait);
      CHECK(r1.windows[i].apps[a].nvcs == r2.windows[i].apps[a].nvcs);
      CHECK(r1.windows[i].apps[a].instructions ==
            r2.windows[i].apps[a].instructions);
    }
  }

  SimResult r3 = Run(cfg, specs, MakeStreams(specs, 43), nullptr);
  CHECK(!SameRecords(r1.records, r3.records));
}

TEST_CASE("an RT app never yields to fair-share neighbors") {
  HostConfig cfg = QuietConfig();
  cfg.num_cores = 1;
  cfg.horizon = 100;
  std::vector<FunctionSpec> specs{MakeSpec("rt", 0.05, 2.0),
                                  MakeSpec("bg", 0.05, 2.0)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 11, 1),
                                     MakeStream(specs[1], 11, 2)};
  StaticPolicy ctl;
  ctl.entries = {{0, 50, 0}};
  SimResult res = Run(cfg, specs, streams, &ctl);

  std::vector<Arrival> trace = GenerateTrace(2.0, 0.05, 11, 1, cfg.horizon);
  std::vector<RequestRecord> rt;
  for (const RequestRecord& r : res.records)
    if (r.app == 0) rt.push_back(r);
  std::sort(rt.begin(), rt.end(),
            [](const RequestRecord& x, const RequestRecord& y) {
              return x.arrival < y.arrival;
            });
  REQUIRE(rt.size() > 50);
  for (size_t i = 0; i < rt.size(); ++i) {
    CHECK(rt[i].execution_latency() ==
          doctest::Approx(trace[i].demand).epsilon(1e-9));
  }
  CHECK(SumWindowField(res, 0, &AppWindow::nvcs) == 0);
  CHECK(SumWindowField(res, 1, &AppWindow::nvcs) > 0);
  CHECK(SumWindowField(res, 1, &AppWindow::wait) > 0);
}

TEST_CASE("equal RT priorities round-robin on the slice boundary") {
  HostConfig cfg = QuietConfig();
  cfg.num_cores = 1;
  cfg.horizon = 30;
  cfg.max_procs_per_app = 3;  // one sandbox each
  std::vector<FunctionSpec> specs{MakeSpec("x", 1000, 1.0),
                                  MakeSpec("y", 1000, 1.0)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 3, 1),
                                     MakeStream(specs[1], 3, 2)};
  StaticPolicy ctl;
  ctl.entries = {{0, 50, 0}, {1, 50, 0}};
  SimResult res = Run(cfg, specs, streams, &ctl);

  REQUIRE(res.windows.size() >= 5);
  for (int w = 2; w <= 4; ++w) {
    for (int a = 0; a < 2; ++a) {
      const AppWindow& aw = res.windows[w].apps[a];
      // Saturated half share of a 5 s window: ~2.5 s running, ~2.5 waiting,
      // one involuntary switch per 0.2 s alternation period.
      CHECK(aw.wait > 2.35);
      CHECK(aw.wait < 2.65);
      CHECK(aw.cycles / cfg.clock_hz > 2.35);
      CHECK(aw.cycles / cfg.clock_hz < 2.65);
      CHECK(aw.nvcs >= 22);
      CHECK(aw.nvcs <= 28);
    }
    CHECK(res.windows[w].fairness == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("fair-share neighbors split a saturated core evenly") {
  HostConfig cfg = QuietConfig();
  cfg.num_cores = 1;
  cfg.horizon = 30;
  cfg.max_procs_per_app = 3;
  std::vector<FunctionSpec> specs{MakeSpec("x", 1000, 1.0),
                                  MakeSpec("y", 1000, 1.0)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 3, 1),
                                     MakeStream(specs[1], 3, 2)};
  SimResult res = Run(cfg, specs, streams, nullptr);

  REQUIRE(res.windows.size() >= 5);
  for (int w = 2; w <= 4; ++w) {
    for (int a = 0; a < 2; ++a) {
      const AppWindow& aw = res.windows[w].apps[a];
      CHECK(aw.wait > 2.3);
      CHECK(aw.wait < 2.7);
      CHECK(aw.cycles / cfg.clock_hz > 2.3);
      CHECK(aw.cycles / cfg.clock_hz < 2.7);
      // Rotation runs on the 10 ms tick; allow the tie-handling cadence to
      // land anywhere between every tick and every other tick.
      CHECK(aw.nvcs >= 100);
      CHECK(aw.nvcs <= 270);
    }
  }
}

TEST_CASE("cross-app switches flush and refill the iTLB") {
  HostConfig cfg = QuietConfig();
  cfg.itlb_enabled = true;
  cfg.num_cores = 1;
  cfg.horizon = 30;
  cfg.max_procs_per_app = 3;
  std::vector<FunctionSpec> specs{MakeSpec("x", 1000, 1.0, false, 100),
                                  MakeSpec("y", 1000, 1.0, false, 100)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 3, 1),
                                     MakeStream(specs[1], 3, 2)};
  SimResult res = Run(cfg, specs, streams, nullptr);

  REQUIRE(res.windows.size() >= 5);
  for (int w = 2; w <= 4; ++w) {
    for (int a = 0; a < 2; ++a) {
      const AppWindow& aw = res.windows[w].apps[a];
      CHECK(aw.flushes >= 90);
      CHECK(aw.flushes <= 280);
      // Every flush costs k_miss * footprint misses.
      CHECK(aw.misses ==
            doctest::Approx(aw.flushes * cfg.k_miss * 100).epsilon(1e-9));
      CHECK(aw.instructions < aw.cycles);
      CHECK(aw.slowdown < 1.0);
      CHECK(aw.slowdown > 0.999);
    }
  }
}

TEST_CASE("the app lock only ever delays, never reorders work away") {
  HostConfig base = QuietConfig();
  base.num_cores = 6;
  base.horizon = 150;
  base.locked_fraction = 0.5;
  std::vector<FunctionSpec> specs{MakeSpec("locky", 0.05, 30.0, true)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 9, 1)};

  HostConfig with = base;
  with.futex_enabled = true;
  HostConfig without = base;
  without.futex_enabled = false;

  SimResult on = Run(with, specs, streams, nullptr);
  SimResult off = Run(without, specs, streams, nullptr);
  auto by_arrival = [](std::vector<RequestRecord> v) {
    std::sort(v.begin(), v.end(),
              [](const RequestRecord& x, const RequestRecord& y) {
                return x.arrival < y.arrival;
              });
    return v;
  };
  std::vector<RequestRecord> a = by_arrival(on.records);
  std::vector<RequestRecord> b = by_arrival(off.records);
  size_t n = std::min(a.size(), b.size());
  REQUIRE(n > 500);
  int strictly_slower = 0;
  for (size_t i = 0; i < n; ++i) {
    CHECK(a[i].arrival == b[i].arrival);
    CHECK(a[i].execution_latency() >= b[i].execution_latency() - 1e-9);
    if (a[i].execution_latency() > b[i].execution_latency() + 1e-6)
      strictly_slower++;
  }
  CHECK(strictly_slower > 0);
}

TEST_CASE("pool sizing follows offered load and respects the cap") {
  SUBCASE("spec-rate sizing") {
    HostConfig cfg = QuietConfig();
    cfg.horizon = 20;
    // lambda * mu = 1.5, rho_target 0.9 -> ceil(1.667) = 2 servers.
    std::vector<FunctionSpec> specs{MakeSpec("two", 0.05, 30.0)};
    std::vector<RequestStream> streams{MakeStream(specs[0], 5, 1)};
    HostSim sim(cfg, specs, streams);
    sim.Run(nullptr);
    CHECK(sim.AutoscaleTarget(0) == 2);
    CHECK(sim.SandboxCount(0) == 2);
  }
  SUBCASE("cap clamps the target") {
    HostConfig cfg = QuietConfig();
    cfg.horizon = 20;
    cfg.max_procs_per_app = 7;  // at most floor(7/3) = 2 sandboxes
    // Required servers would be ceil(10 / 0.9) = 12.
    std::vector<FunctionSpec> specs{MakeSpec("hot", 0.05, 200.0)};
    std::vector<RequestStream> streams{MakeStream(specs[0], 5, 1)};
    HostSim sim(cfg, specs, streams);
    sim.Run(nullptr);
    CHECK(sim.AutoscaleTarget(0) == 2);
    CHECK(sim.SandboxCount(0) <= 2);
  }
  SUBCASE("observed-rate sizing converges onto the arrival rate") {
    HostConfig cfg = QuietConfig();
    cfg.autoscale_observed = true;
    cfg.horizon = 60;
    cfg.max_procs_per_app = 21;
    std::vector<FunctionSpec> specs{MakeSpec("obs", 0.05, 30.0)};
    std::vector<RequestStream> streams{MakeStream(specs[0], 5, 1)};
    HostSim sim(cfg, specs, streams);
    sim.Run(nullptr);
    CHECK(oracle::RelErr(sim.ObservedRate(0), 30.0) < 0.4);
    CHECK(sim.AutoscaleTarget(0) >= 1);
    CHECK(sim.AutoscaleTarget(0) <= 4);
  }
}

TEST_CASE("policy enforcement accepts, rejects, and resets") {
  HostConfig cfg = QuietConfig();
  cfg.num_cores = 6;
  std::vector<FunctionSpec> specs{MakeSpec("a", 0.1, 1.0),
                                  MakeSpec("b", 0.1, 1.0)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 1, 1),
                                     MakeStream(specs[1], 1, 2)};
  HostSim sim(cfg, specs, streams);

  CHECK(sim.ApplySchedPolicy(0, 50, 2).status == EnforceStatus::kApplied);
  CHECK(sim.priority_of(0) == 50);
  CHECK(sim.alloc_of(0) == 2);
  CHECK(sim.dedicated_elsewhere(1) == 2);

  // 2 + 3 dedicated leaves one shared core on a 6-core host: allowed.
  CHECK(sim.ApplySchedPolicy(1, 60, 3).status == EnforceStatus::kApplied);
  CHECK(sim.dedicated_elsewhere(0) == 3);

  // 2 + 4 would consume every core: rejected, and the offender resets.
  CHECK(sim.ApplySchedPolicy(1, 60, 4).status ==
        EnforceStatus::kRejectedReserve);
  CHECK(sim.priority_of(1) == 0);
  CHECK(sim.alloc_of(1) == 0);
  CHECK(sim.priority_of(0) == 50);  // bystander untouched
  CHECK(sim.alloc_of(0) == 2);

  CHECK(sim.ApplySchedPolicy(1, 120, 0).status ==
        EnforceStatus::kRejectedPriority);
  CHECK(sim.ApplySchedPolicy(1, 0, 0).status ==
        EnforceStatus::kRejectedPriority);
  CHECK(sim.ApplySchedPolicy(1, 50, -3).status ==
        EnforceStatus::kRejectedAllocation);

  // Revoking both dimensions frees the dedication.
  CHECK(sim.ApplySchedPolicy(0, kRevoke, kRevoke).status ==
        EnforceStatus::kApplied);
  CHECK(sim.priority_of(0) == 0);
  CHECK(sim.alloc_of(0) == 0);
  CHECK(sim.dedicated_elsewhere(1) == 0);

  CHECK_THROWS_AS(sim.SetAffinityMask(0, 0), std::invalid_argument);
}

TEST_CASE("dedicated cores stay exclusive under audit") {
  HostConfig cfg;
  cfg.num_cores = 4;
  cfg.horizon = 60;
  cfg.audit = true;
  std::vector<FunctionSpec> specs{MakeSpec("rt", 0.05, 8.0, true, 30),
                                  MakeSpec("bulk", 0.2, 3.0, false, 50),
                                  MakeSpec("spiky", 0.02, 10.0, false, 10)};
  auto streams = MakeStreams(specs, 17);
  StaticPolicy ctl;
  ctl.entries = {{0, 70, 2}};
  SimResult res = Run(cfg, specs, streams, &ctl);
  REQUIRE(!res.windows.empty());
  for (const WindowSnapshot& w : res.windows) {
    CHECK(w.apps[0].p_id == 70);
    CHECK(w.apps[0].a_id == 2);
  }
  CHECK(res.records.size() > 100);
}

TEST_CASE("per-window counters stay mutually consistent") {
  HostConfig cfg;
  cfg.num_cores = 2;
  cfg.horizon = 80;
  cfg.background_tasks = 1;
  std::vector<FunctionSpec> specs{MakeSpec("a", 0.1, 4.0, true, 64),
                                  MakeSpec("b", 0.08, 5.0, false, 32)};
  auto streams = MakeStreams(specs, 23);
  SimResult res = Run(cfg, specs, streams, nullptr);
  REQUIRE(!res.windows.empty());
  double total_cycles = 0;
  for (const WindowSnapshot& w : res.windows) {
    CHECK(w.fairness > 0);
    CHECK(w.fairness <= 1.0 + 1e-12);
    for (const AppWindow& a : w.apps) {
      CHECK(a.wait >= 0);
      CHECK(a.instructions <= a.cycles + 1e-6);
      CHECK(a.slowdown > 0);
      CHECK(a.slowdown <= 1.0 + 1e-12);
      total_cycles += a.cycles;
    }
  }
  // Two cores cannot execute more than 2 * horizon seconds of cycles.
  CHECK(total_cycles / cfg.clock_hz <= 2 * cfg.horizon + 1e-6);
  double demand = res.totals.demand_seconds[0] + res.totals.demand_seconds[1];
  CHECK(demand <= 2 * cfg.horizon + 1e-6);
  CHECK(demand > 0);
}

TEST_CASE("cold pools charge the container start delay") {
  HostConfig cfg = QuietConfig();
  cfg.prewarm = false;
  cfg.horizon = 40;
  std::vector<FunctionSpec> specs{MakeSpec("coldy", 0.05, 1.0)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 29, 1)};
  SimResult res = Run(cfg, specs, streams, nullptr);
  REQUIRE(!res.records.empty());
  std::vector<RequestRecord> by_arrival = res.records;
  std::sort(by_arrival.begin(), by_arrival.end(),
            [](const RequestRecord& x, const RequestRecord& y) {
              return x.arrival < y.arrival;
            });
  CHECK(by_arrival[0].cold_start);
  CHECK(by_arrival[0].response_latency() >= cfg.cold_start_delay - 1e-9);
  CHECK(res.totals.cold_starts[0] >= 1);

  HostConfig warm = cfg;
  warm.prewarm = true;
  SimResult res2 = Run(warm, specs, streams, nullptr);
  CHECK(res2.totals.cold_starts[0] == 0);
}

TEST_CASE("bounded queues shed overload instead of growing") {
  HostConfig cfg = QuietConfig();
  cfg.queue_capacity = 1;
  cfg.max_procs_per_app = 3;
  cfg.horizon = 20;
  std::vector<FunctionSpec> specs{MakeSpec("burst", 0.1, 50.0)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 31, 1)};
  SimResult res = Run(cfg, specs, streams, nullptr);
  CHECK(res.totals.dropped[0] > 0);
  CHECK(res.records.size() > 0);
}

TEST_CASE("host daemons contend like any other tenant") {
  HostConfig cfg = QuietConfig();
  cfg.num_cores = 1;
  cfg.horizon = 60;
  cfg.itlb_enabled = true;
  cfg.background_tasks = 2;
  cfg.background_storm_rate = 10.0;
  cfg.background_burst = 0.05;
  cfg.audit = true;
  std::vector<FunctionSpec> specs{MakeSpec("tenant", 0.05, 4.0, false, 80)};
  std::vector<RequestStream> streams{MakeStream(specs[0], 37, 1)};
  SimResult res = Run(cfg, specs, streams, nullptr);
  CHECK(SumWindowField(res, 0, &AppWindow::wait) > 0);
  CHECK(SumWindowField(res, 0, &AppWindow::flushes) > 0);
  CHECK(res.records.size() > 100);

  HostConfig alone = cfg;
  alone.background_tasks = 0;
  SimResult solo = Run(alone, specs, streams, nullptr);
  // The same workload without daemons completes at least as fast on average.
  double busy = 0, quiet = 0;
  for (const RequestRecord& r : res.records) busy += r.response_latency();
  for (const RequestRecord& r : solo.records) quiet += r.response_latency();
  busy /= double(res.records.size());
  quiet /= double(solo.records.size());
  CHECK(quiet <= busy + 1e-9);
}
