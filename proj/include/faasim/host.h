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

#ifndef FAASIM_HOST_H_
#define FAASIM_HOST_H_

#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "faasim/rng.h"
#include "faasim/workload.h"

namespace faasim {

// Discrete-event model of one multi-tenant host: cores, container
// processes in two scheduling classes (fair-share OTHER and fixed-priority
// round-robin RT), per-application sandbox pools with autoscaling, an iTLB
// pollution model charged on cross-application context switches, and an
// optional per-application futex lock serializing part of each request.

enum class ProcRole { kWorker, kShim, kAuxiliary, kBackground };
enum class SchedClass { kOther, kRoundRobin };
enum class RunState { kSleeping, kRunnable, kRunning, kBlocked };

struct HostConfig {
  int num_cores = 6;
  double horizon = 1000;
  double window = 5.0;          // monitoring window, seconds
  double rr_slice = 0.1;        // RT round-robin quantum
  double other_tick = 0.01;     // fair-share rotation period
  double cold_start_delay = 0.5;
  double rho_target = 0.9;      // autoscale keeps per-app load at or under
  int max_procs_per_app = 7;    // caps sandboxes at floor(max/3)
  bool prewarm = true;          // provision the t=0 pool warm
  bool autoscale_observed = true;  // false: size pools from spec rates only
  double rate_window = 10.0;    // span of the arrival-rate estimator
  int queue_capacity = 0;       // per-app pending requests; 0 = unbounded

  bool sidecar_noise = true;    // shim/aux wake on request start/finish
  double sidecar_wake = 1e-4;   // seconds of CPU per sidecar wake

  bool itlb_enabled = true;
  double k_miss = 4.0;          // misses charged per footprint page
  double penalty_cycles = 40.0;  // cycles per miss
  double clock_hz = 3.8e9;

  bool futex_enabled = true;
  double locked_fraction = 0.3;  // share of demand under the app lock

  // Optional host daemons (platform/OS stand-ins). They run OTHER class
  // with full affinity and wake in correlated storms.
  int background_tasks = 0;
  double background_storm_rate = 5.0;  // storms per second
  int background_storm_width = 0;      // procs per storm; 0 = all
  double background_burst = 0.02;      // mean CPU seconds per woken proc
  double background_footprint = 64;

  uint64_t seed = 1;            // host-side randomness (daemons)
  bool audit = false;           // per-event invariant checks (tests)
  std::string trace_path;       // optional event trace CSV
};

struct Counters {
  double cpu_wait_time = 0;   // runnable-but-not-running plus lock waits
  double nvcs = 0;            // involuntary context switches
  double vcs = 0;             // voluntary yields (block/sleep)
  double itlb_flushes = 0;
  double itlb_misses = 0;
  double instructions = 0;    // abstract: one per demand cycle
  double cycles = 0;          // demand plus refill stalls
};

struct RequestRecord {
  int app = -1;
  double arrival = 0;
  double start_exec = 0;   // dispatch into a sandbox
  double completion = 0;
  bool cold_start = false;
  double execution_latency() const { return completion - start_exec; }
  double response_latency() const { return completion - arrival; }
};

// Per-app aggregate over one monitoring window.
struct AppWindow {
  int app = -1;
  std::string id;
  std::vector<int> pids;
  int p_id = 0;    // RT priority; 0 = OTHER
  int a_id = 0;    // dedicated cores held
  bool f_lock = false;
  double wait = 0;      // cpu_wait_time delta
  double nvcs = 0;
  double misses = 0;    // itlb_misses delta
  double flushes = 0;
  double vcs = 0;
  double instructions = 0;
  double cycles = 0;
  double slowdown = 1.0;  // instructions / cycles; 1 when no cycles ran
  int sandboxes = 0;
  double lambda_obs = 0;
  int arrivals = 0;
  int completions = 0;
};

struct WindowSnapshot {
  int index = 0;
  double t0 = 0, t1 = 0;
  int num_cores = 0;
  double fairness = 1.0;  // min/max over per-app slowdowns
  std::vector<AppWindow> apps;
};

// apply_sched_policy sentinel: revoke priority and/or allocation.
constexpr int kRevoke = -1;

enum class EnforceStatus {
  kApplied,
  kRejectedPriority,    // priority outside [1, 99]
  kRejectedAllocation,  // negative core count
  kRejectedReserve,     // dedication would leave no shared core
};

struct EnforceResult {
  EnforceStatus status = EnforceStatus::kApplied;
  bool applied() const { return status == EnforceStatus::kApplied; }
};

struct SimTotals {
  double horizon = 0;
  std::vector<double> demand_seconds;   // per app, worker demand executed
  std::vector<double> in_system_avg;    // time-averaged requests in system
  std::vector<int64_t> dropped;
  std::vector<int64_t> cold_starts;
  int64_t enforcement_rejections = 0;
};

struct SimResult {
  std::vector<RequestRecord> records;
  std::vector<WindowSnapshot> windows;
  SimTotals totals;
};

class HostSim;

// Mutation surface handed to controllers at window boundaries.
class HostControl {
 public:
  explicit HostControl(HostSim* host) : host_(host) {}

  // Sets RT priority and dedicated-core count for every process of the
  // app.  kRevoke for either field resets that dimension (priority back to
  // OTHER, allocation back to the full shared mask).  Any rejection resets
  // the app to OTHER with a full mask and reports why.
  EnforceResult ApplySchedPolicy(int app, int priority, int alloc);

  // Raw affinity override used by static partitioning baselines; no
  // exclusivity bookkeeping, masks may overlap between apps.
  void SetAffinityMask(int app, uint64_t mask);

  int num_cores() const;
  int app_count() const;
  int AppIndex(const std::string& id) const;  // -1 when absent
  const FunctionSpec& spec(int app) const;
  int priority_of(int app) const;
  int alloc_of(int app) const;
  int dedicated_elsewhere(int app) const;  // cores owned by other apps
  double now() const;

 private:
  HostSim* host_;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual void OnStart(HostControl&) {}
  virtual void OnWindow(const WindowSnapshot&, HostControl&) {}
};

class HostSim {
 public:
  HostSim(const HostConfig& cfg, std::vector<FunctionSpec> specs,
          const std::vector<RequestStream>& streams);
  ~HostSim();

  // Runs the event loop to the horizon.  controller may be null.
  SimResult Run(Controller* controller);

  // Exposed for HostControl and white-box tests.
  EnforceResult ApplySchedPolicy(int app, int priority, int alloc);
  void SetAffinityMask(int app, uint64_t mask);
  int AutoscaleTarget(int app) const;   // last computed pool target
  double ObservedRate(int app) const;
  int SandboxCount(int app) const;
  int num_cores() const { return cfg_.num_cores; }
  double now() const { return now_; }
  int app_count() const { return static_cast<int>(apps_.size()); }
  const FunctionSpec& spec(int app) const { return apps_[app].spec; }
  int priority_of(int app) const { return apps_[app].p_id; }
  int alloc_of(int app) const { return apps_[app].a_id; }
  int AppIndex(const std::string& id) const;
  int dedicated_elsewhere(int app) const;

 private:
  friend class HostControl;

  enum class Ev { kArrival, kSandboxReady, kCoreTimer, kWindow, kStorm };
  struct Event {
    double t;
    uint64_t seq;
    Ev kind;
    int a = -1;
    uint64_t gen = 0;
  };
  struct EventCmp {
    bool operator()(const Event& x, const Event& y) const {
      if (x.t != y.t) return x.t > y.t;
      return x.seq > y.seq;
    }
  };

  struct Proc {
    int pid = -1;
    int app = -1;  // -1: host daemon
    ProcRole role = ProcRole::kWorker;
    SchedClass cls = SchedClass::kOther;
    int prio = 0;
    RunState state = RunState::kSleeping;
    double vruntime = 0;
    double pending_work = 0;   // sidecar/daemon CPU demand
    double pending_stall = 0;  // iTLB refill debt
    int sandbox = -1;
    int last_core = 0;
    int core = -1;
    double seg_start = 0;
    double seg_end = 0;
    double slice_left = 0;
    double runnable_since = 0;
    uint64_t enq_seq = 0;
    Counters ctr;
    double state_since = 0;
    double t_run = 0, t_wait = 0, t_blocked = 0, t_sleep = 0;
    bool alive = true;
  };

  struct Sandbox {
    int id = -1;
    int app = -1;
    int worker = -1, shim = -1, aux = -1;
    bool warm = false;
    bool busy = false;
    bool retiring = false;
    bool alive = true;
    double warm_at = 0;
    // active request
    double arrival = 0, start_exec = 0;
    double locked_left = 0, unlocked_left = 0;
    bool cold = false;
    bool holds_lock = false;
  };

  struct App {
    FunctionSpec spec;
    int index = 0;
    std::deque<std::pair<double, double>> queue;  // (arrival, demand)
    std::vector<int> sandboxes;
    int p_id = 0;
    int a_id = 0;
    uint64_t mask = 0;
    std::vector<int> dedicated;
    bool lock_held = false;
    std::deque<int> lock_waiters;  // sandbox ids, FIFO
    std::deque<double> recent_arrivals;
    Counters retired;
    int target = 1;
    // arrival generation
    std::unique_ptr<ArrivalSequence> source;
    double next_time = 0, next_demand = 0;
    bool exhausted = true;
    // global stats
    int64_t arrivals_total = 0, completions_total = 0;
    int64_t dropped = 0, cold_starts = 0;
    double demand_done = 0;
    double in_system_integral = 0, in_system_t = 0;
    int in_system = 0;
    // window accumulators
    int win_arrivals = 0, win_completions = 0;
    Counters win_base;
  };

  struct Core {
    int running = -1;     // pid
    int64_t last_key = -1;  // resident address space
    uint64_t gen = 0;
  };

  // -- event handlers --
  void HandleArrival(int app);
  void HandleSandboxReady(int sbx);
  void HandleCoreTimer(int core, uint64_t gen);
  void HandleWindow();
  void HandleStorm();

  // -- scheduling --
  bool Eligible(const Proc& p, int core) const;
  int PickNext(int core) const;
  void Reschedule(int core);
  void Transition(Proc& p, RunState to);
  void MakeRunnable(int pid);
  bool TryPlace(int pid);
  void StartRunning(int core, int pid);
  bool CompetitorWaiting(int core, const Proc& p) const;
  void BeginSegment(int core);
  void AccountSegment(int core);
  void StopRunning(int core, bool voluntary, RunState next);
  void EnsureTimerBound(int core);
  void RetimeCore(int core, double when);
  double MinOtherVruntime() const;
  void ClampVruntime(Proc& p);

  // -- requests / sandboxes --
  void Autoscale(int app);
  int SpawnSandbox(int app, bool warm);
  void RemoveSandbox(int sbx);
  void TryDispatch(int app);
  void CompleteRequest(int core, int sbx);
  void ReleaseLock(int app, int sbx);
  void WakeSidecar(int pid);
  void InSystemAdd(int app, int delta);

  // -- misc --
  void Push(double t, Ev kind, int a = -1, uint64_t gen = 0);
  void ChargeItlb(int core, Proc& p);
  int64_t AddressKey(const Proc& p) const;
  double Footprint(const Proc& p) const;
  void AfterPolicyChange();
  Counters CumCounters(const App& a) const;
  void BuildWindowSnapshot(WindowSnapshot* snap);
  void Trace(const char* kind, int core, int pid, int app,
             const std::string& detail);
  void AuditInvariants() const;
  void FinalizeAccounting();

  HostConfig cfg_;
  std::vector<App> apps_;
  std::vector<Proc> procs_;
  std::vector<Sandbox> sandboxes_;
  std::vector<Core> cores_;
  std::vector<int> dedicated_owner_;  // per core, app or -1
  std::priority_queue<Event, std::vector<Event>, EventCmp> events_;
  uint64_t event_seq_ = 0;
  uint64_t enq_seq_ = 0;
  double now_ = 0;
  uint64_t full_mask_ = 0;
  CounterRng bg_rng_;
  int bg_next_ = 0;
  std::vector<int> bg_procs_;
  Controller* controller_ = nullptr;
  std::unique_ptr<HostControl> control_;
  int window_index_ = 0;
  SimResult result_;
  std::ofstream trace_;
  bool running_loop_ = false;
};

// Top-level entry point: builds the host and runs it.
SimResult Run(const HostConfig& cfg, const std::vector<FunctionSpec>& specs,
              const std::vector<RequestStream>& streams,
              Controller* controller);

}  // namespace faasim

#endif  // FAASIM_HOST_H_
