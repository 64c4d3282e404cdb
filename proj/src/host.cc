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

#include "faasim/host.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "faasim/monitor.h"

namespace faasim {
namespace {

// Work/time comparisons; all quantities are seconds.
constexpr double kEps = 1e-12;

// Event instants must strictly advance: late in a long run the ulp of the
// clock exceeds small work residuals, and t + dt == t would re-queue the
// same timer at the same instant forever.
double NextInstant(double t, double dt) {
  double u = t + dt;
  if (u > t) return u;
  return std::nextafter(t, std::numeric_limits<double>::infinity());
}

void FoldCounters(Counters* into, const Counters& from) {
  into->cpu_wait_time += from.cpu_wait_time;
  into->nvcs += from.nvcs;
  into->vcs += from.vcs;
  into->itlb_flushes += from.itlb_flushes;
  into->itlb_misses += from.itlb_misses;
  into->instructions += from.instructions;
  into->cycles += from.cycles;
}

}  // namespace

// ---------------------------------------------------------------------------
// HostControl: thin delegation.

EnforceResult HostControl::ApplySchedPolicy(int app, int priority, int alloc) {
  return host_->ApplySchedPolicy(app, priority, alloc);
}
void HostControl::SetAffinityMask(int app, uint64_t mask) {
  host_->SetAffinityMask(app, mask);
}
int HostControl::num_cores() const { return host_->num_cores(); }
int HostControl::app_count() const { return host_->app_count(); }
int HostControl::AppIndex(const std::string& id) const {
  return host_->AppIndex(id);
}
const FunctionSpec& HostControl::spec(int app) const {
  return host_->spec(app);
}
int HostControl::priority_of(int app) const { return host_->priority_of(app); }
int HostControl::alloc_of(int app) const { return host_->alloc_of(app); }
int HostControl::dedicated_elsewhere(int app) const {
  return host_->dedicated_elsewhere(app);
}
double HostControl::now() const { return host_->now(); }

// ---------------------------------------------------------------------------
// Construction.

HostSim::HostSim(const HostConfig& cfg, std::vector<FunctionSpec> specs,
                 const std::vector<RequestStream>& streams)
    : cfg_(cfg), bg_rng_(cfg.seed, 0xb06) {
  if (cfg_.num_cores < 1 || cfg_.num_cores > 63)
    throw std::invalid_argument("num_cores must be in [1, 63]");
  if (cfg_.horizon <= 0) throw std::invalid_argument("horizon must be > 0");
  if (cfg_.window <= 0) throw std::invalid_argument("window must be > 0");
  if (cfg_.rr_slice <= 0 || cfg_.other_tick <= 0)
    throw std::invalid_argument("scheduler quanta must be > 0");
  if (cfg_.max_procs_per_app < 3)
    throw std::invalid_argument("per-app process cap below one sandbox");
  if (cfg_.cold_start_delay < 0)
    throw std::invalid_argument("cold_start_delay must be >= 0");
  if (cfg_.rho_target <= 0 || cfg_.rho_target > 1)
    throw std::invalid_argument("rho_target must be in (0, 1]");
  if (cfg_.rate_window <= 0)
    throw std::invalid_argument("rate_window must be > 0");
  if (cfg_.clock_hz <= 0) throw std::invalid_argument("clock_hz must be > 0");
  if (cfg_.locked_fraction < 0 || cfg_.locked_fraction >= 1)
    throw std::invalid_argument("locked_fraction must be in [0, 1)");
  if (cfg_.background_tasks > 0 && cfg_.background_burst <= 0)
    throw std::invalid_argument("background_burst must be > 0");

  full_mask_ = (1ull << cfg_.num_cores) - 1;
  cores_.resize(cfg_.num_cores);
  dedicated_owner_.assign(cfg_.num_cores, -1);

  apps_.reserve(specs.size());
  for (size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].mean_service_time <= 0)
      throw std::invalid_argument("mean_service_time must be > 0");
    App a;
    a.spec = std::move(specs[i]);
    a.index = static_cast<int>(i);
    a.mask = full_mask_;
    apps_.push_back(std::move(a));
  }

  for (const RequestStream& s : streams) {
    int idx = AppIndex(s.app);
    if (idx < 0) throw std::invalid_argument("stream for unknown app " + s.app);
    App& a = apps_[idx];
    if (a.source) throw std::invalid_argument("duplicate stream for " + s.app);
    a.source = std::make_unique<ArrivalSequence>(
        s.arrival_rate, s.mean_service_time, s.seed, s.stream);
    Arrival first = a.source->Next();
    a.next_time = first.time;
    a.next_demand = first.demand;
    a.exhausted = false;
  }

  for (int i = 0; i < cfg_.background_tasks; ++i) {
    Proc d;
    d.pid = static_cast<int>(procs_.size());
    d.app = -1;
    d.role = ProcRole::kBackground;
    d.last_core = d.pid % cfg_.num_cores;
    procs_.push_back(d);
    bg_procs_.push_back(d.pid);
  }

  if (cfg_.prewarm) {
    int cap = std::max(1, cfg_.max_procs_per_app / 3);
    for (App& a : apps_) {
      if (!a.source || a.spec.arrival_rate <= 0) continue;
      a.target = std::min(
          cap, RequiredServers(a.spec.arrival_rate, a.spec.mean_service_time,
                               cfg_.rho_target));
      for (int k = 0; k < a.target; ++k) SpawnSandbox(a.index, true);
    }
  }

  if (!cfg_.trace_path.empty()) {
    trace_.open(cfg_.trace_path);
    if (!trace_) throw std::runtime_error("cannot open " + cfg_.trace_path);
    trace_ << "time,kind,core,pid,app,detail\n";
  }
}

HostSim::~HostSim() = default;

int HostSim::AppIndex(const std::string& id) const {
  for (const App& a : apps_)
    if (a.spec.id == id) return a.index;
  return -1;
}

int HostSim::dedicated_elsewhere(int app) const {
  int n = 0;
  for (int owner : dedicated_owner_)
    if (owner >= 0 && owner != app) ++n;
  return n;
}

int HostSim::AutoscaleTarget(int app) const { return apps_[app].target; }

int HostSim::SandboxCount(int app) const {
  int n = 0;
  for (int sbx : apps_[app].sandboxes)
    if (sandboxes_[sbx].alive) ++n;
  return n;
}

double HostSim::ObservedRate(int app) const {
  const App& a = apps_[app];
  if (now_ < cfg_.rate_window) return a.spec.arrival_rate;
  double cut = now_ - cfg_.rate_window;
  auto it = std::lower_bound(a.recent_arrivals.begin(),
                             a.recent_arrivals.end(), cut);
  return static_cast<double>(a.recent_arrivals.end() - it) / cfg_.rate_window;
}

// ---------------------------------------------------------------------------
// Event loop.

void HostSim::Push(double t, Ev kind, int a, uint64_t gen) {
  events_.push(Event{std::max(t, now_), ++event_seq_, kind, a, gen});
}

SimResult HostSim::Run(Controller* controller) {
  if (running_loop_) throw std::logic_error("Run is single-shot");
  running_loop_ = true;
  controller_ = controller;
  control_ = std::make_unique<HostControl>(this);

  for (App& a : apps_)
    if (!a.exhausted && a.next_time < cfg_.horizon)
      Push(a.next_time, Ev::kArrival, a.index);
  if (cfg_.window <= cfg_.horizon + 1e-9) Push(cfg_.window, Ev::kWindow);
  if (!bg_procs_.empty() && cfg_.background_storm_rate > 0)
    Push(bg_rng_.NextExp(cfg_.background_storm_rate), Ev::kStorm);

  if (controller_) controller_->OnStart(*control_);

  while (!events_.empty()) {
    Event e = events_.top();
    if (e.t > cfg_.horizon + 1e-9) break;
    events_.pop();
    now_ = std::max(now_, e.t);
    switch (e.kind) {
      case Ev::kArrival:
        HandleArrival(e.a);
        break;
      case Ev::kSandboxReady:
        HandleSandboxReady(e.a);
        break;
      case Ev::kCoreTimer:
        HandleCoreTimer(e.a, e.gen);
        break;
      case Ev::kWindow:
        HandleWindow();
        break;
      case Ev::kStorm:
        HandleStorm();
        break;
    }
    if (cfg_.audit) AuditInvariants();
  }

  FinalizeAccounting();
  return std::move(result_);
}

void HostSim::HandleArrival(int app) {
  App& a = apps_[app];
  a.arrivals_total++;
  a.win_arrivals++;
  a.recent_arrivals.push_back(now_);
  double cut = now_ - cfg_.rate_window;
  while (!a.recent_arrivals.empty() && a.recent_arrivals.front() < cut)
    a.recent_arrivals.pop_front();

  if (cfg_.queue_capacity > 0 &&
      static_cast<int>(a.queue.size()) >= cfg_.queue_capacity) {
    a.dropped++;
    Trace("drop", -1, -1, app, "queue full");
  } else {
    a.queue.emplace_back(now_, a.next_demand);
    InSystemAdd(app, +1);
  }

  Arrival nx = a.source->Next();
  a.next_time = nx.time;
  a.next_demand = nx.demand;
  if (a.next_time < cfg_.horizon) {
    Push(a.next_time, Ev::kArrival, app);
  } else {
    a.exhausted = true;
  }

  Autoscale(app);
  TryDispatch(app);
}

void HostSim::HandleSandboxReady(int sbx) {
  Sandbox& sb = sandboxes_[sbx];
  if (!sb.alive) return;
  sb.warm = true;
  sb.warm_at = now_;
  Trace("warm", -1, sb.worker, sb.app, "");
  TryDispatch(sb.app);
}

void HostSim::HandleCoreTimer(int core, uint64_t gen) {
  Core& c = cores_[core];
  if (gen != c.gen) return;  // superseded
  int pid = c.running;
  if (pid < 0) return;
  AccountSegment(core);
  Proc& p = procs_[pid];

  if (p.role == ProcRole::kWorker) {
    Sandbox& sb = sandboxes_[p.sandbox];
    if (p.pending_stall <= kEps) {
      if (sb.holds_lock && sb.locked_left <= kEps) ReleaseLock(p.app, p.sandbox);
      if (sb.busy && sb.locked_left <= kEps && sb.unlocked_left <= kEps) {
        CompleteRequest(core, p.sandbox);
        return;
      }
    }
  } else {
    if (p.pending_stall <= kEps && p.pending_work <= kEps) {
      StopRunning(core, true, RunState::kSleeping);
      Reschedule(core);
      return;
    }
  }

  if (p.cls == SchedClass::kOther) {
    bool rotate = false;
    for (const Proc& q : procs_) {
      if (!q.alive || q.state != RunState::kRunnable || !Eligible(q, core))
        continue;
      if (q.cls == SchedClass::kRoundRobin || q.vruntime < p.vruntime) {
        rotate = true;
        break;
      }
    }
    if (rotate) {
      StopRunning(core, false, RunState::kRunnable);
      Reschedule(core);
    } else {
      BeginSegment(core);
    }
  } else {
    if (p.slice_left <= kEps) {
      bool waiter = false;
      for (const Proc& q : procs_) {
        if (!q.alive || q.state != RunState::kRunnable || !Eligible(q, core))
          continue;
        if (q.cls == SchedClass::kRoundRobin && q.prio >= p.prio) {
          waiter = true;
          break;
        }
      }
      p.slice_left = cfg_.rr_slice;
      if (waiter) {
        StopRunning(core, false, RunState::kRunnable);
        Reschedule(core);
      } else {
        BeginSegment(core);
      }
    } else {
      BeginSegment(core);
    }
  }
}

void HostSim::HandleWindow() {
  WindowSnapshot snap;
  BuildWindowSnapshot(&snap);
  result_.windows.push_back(std::move(snap));
  if (controller_) controller_->OnWindow(result_.windows.back(), *control_);
  for (App& a : apps_) {
    a.win_base = CumCounters(a);
    a.win_arrivals = 0;
    a.win_completions = 0;
  }
  window_index_++;
  double next = cfg_.window * (window_index_ + 1);
  if (next <= cfg_.horizon + 1e-9) Push(next, Ev::kWindow);
}

void HostSim::HandleStorm() {
  int n = static_cast<int>(bg_procs_.size());
  if (n == 0) return;
  int width = cfg_.background_storm_width <= 0
                  ? n
                  : std::min(n, cfg_.background_storm_width);
  for (int i = 0; i < width; ++i) {
    int pid = bg_procs_[(bg_next_ + i) % n];
    Proc& p = procs_[pid];
    p.pending_work += bg_rng_.NextExp(1.0 / cfg_.background_burst);
    if (p.state == RunState::kSleeping) MakeRunnable(pid);
  }
  bg_next_ = (bg_next_ + width) % n;
  Push(now_ + bg_rng_.NextExp(cfg_.background_storm_rate), Ev::kStorm);
}

// ---------------------------------------------------------------------------
// Scheduling.

bool HostSim::Eligible(const Proc& p, int core) const {
  uint64_t mask = p.app >= 0 ? apps_[p.app].mask : full_mask_;
  if (!((mask >> core) & 1)) return false;
  int owner = dedicated_owner_[core];
  return owner < 0 || owner == p.app;
}

int HostSim::PickNext(int core) const {
  int best_rr = -1, best_ot = -1;
  for (const Proc& p : procs_) {
    if (!p.alive || p.state != RunState::kRunnable || !Eligible(p, core))
      continue;
    if (p.cls == SchedClass::kRoundRobin) {
      if (best_rr < 0) {
        best_rr = p.pid;
      } else {
        const Proc& b = procs_[best_rr];
        if (p.prio > b.prio || (p.prio == b.prio && p.enq_seq < b.enq_seq))
          best_rr = p.pid;
      }
    } else {
      if (best_ot < 0 || p.vruntime < procs_[best_ot].vruntime) best_ot = p.pid;
    }
  }
  return best_rr >= 0 ? best_rr : best_ot;
}

void HostSim::Reschedule(int core) {
  if (cores_[core].running >= 0) return;
  int pid = PickNext(core);
  if (pid >= 0) StartRunning(core, pid);
}

void HostSim::Transition(Proc& p, RunState to) {
  if (to == RunState::kRunnable && p.cls == SchedClass::kOther)
    ClampVruntime(p);  // before p itself counts as active
  double dt = now_ - p.state_since;
  switch (p.state) {
    case RunState::kRunnable:
      p.ctr.cpu_wait_time += dt;
      p.t_wait += dt;
      break;
    case RunState::kBlocked:
      p.ctr.cpu_wait_time += dt;
      p.t_blocked += dt;
      break;
    case RunState::kSleeping:
      p.t_sleep += dt;
      break;
    case RunState::kRunning:
      break;  // segments own running-time accounting
  }
  p.state = to;
  p.state_since = now_;
  if (to == RunState::kRunnable) p.enq_seq = ++enq_seq_;
}

void HostSim::MakeRunnable(int pid) {
  Proc& p = procs_[pid];
  if (!p.alive) return;
  if (p.state == RunState::kRunning || p.state == RunState::kRunnable) return;
  Transition(p, RunState::kRunnable);
  if (!TryPlace(pid)) {
    for (int c = 0; c < cfg_.num_cores; ++c)
      if (Eligible(p, c)) EnsureTimerBound(c);
  }
}

bool HostSim::TryPlace(int pid) {
  Proc& p = procs_[pid];
  if (p.state != RunState::kRunnable) return true;

  int lc = p.last_core;
  if (lc >= 0 && lc < cfg_.num_cores && cores_[lc].running < 0 &&
      Eligible(p, lc)) {
    StartRunning(lc, pid);
    return true;
  }
  for (int c = 0; c < cfg_.num_cores; ++c) {
    if (cores_[c].running < 0 && Eligible(p, c)) {
      StartRunning(c, pid);
      return true;
    }
  }

  // No idle core: preempt the weakest strictly lower-ranked runner.
  auto rank = [this](int q) {
    const Proc& r = procs_[q];
    return r.cls == SchedClass::kRoundRobin ? r.prio : 0;
  };
  int my_rank = p.cls == SchedClass::kRoundRobin ? p.prio : 0;
  int victim_core = -1, victim_rank = my_rank;
  for (int c = 0; c < cfg_.num_cores; ++c) {
    int q = cores_[c].running;
    if (q < 0 || !Eligible(p, c)) continue;
    int r = rank(q);
    if (r < victim_rank) {
      victim_rank = r;
      victim_core = c;
    }
  }
  if (victim_core < 0) return false;

  int vpid = cores_[victim_core].running;
  StopRunning(victim_core, false, RunState::kRunnable);
  StartRunning(victim_core, pid);
  Trace("preempt", victim_core, vpid, procs_[vpid].app, "by " + std::to_string(pid));
  TryPlace(vpid);  // rank strictly decreases along the chain
  if (procs_[vpid].state == RunState::kRunnable) {
    for (int c = 0; c < cfg_.num_cores; ++c)
      if (Eligible(procs_[vpid], c)) EnsureTimerBound(c);
  }
  return true;
}

void HostSim::StartRunning(int core, int pid) {
  Core& c = cores_[core];
  assert(c.running < 0);
  Proc& p = procs_[pid];
  Transition(p, RunState::kRunning);
  p.core = core;
  p.last_core = core;
  c.running = pid;
  ChargeItlb(core, p);
  if (p.cls == SchedClass::kRoundRobin && p.slice_left <= kEps)
    p.slice_left = cfg_.rr_slice;
  Trace("run", core, pid, p.app, "");
  BeginSegment(core);
}

bool HostSim::CompetitorWaiting(int core, const Proc& p) const {
  for (const Proc& q : procs_) {
    if (!q.alive || q.state != RunState::kRunnable || !Eligible(q, core))
      continue;
    if (p.cls == SchedClass::kOther) return true;  // any waiter bounds a tick
    if (q.cls == SchedClass::kRoundRobin && q.prio >= p.prio) return true;
  }
  return false;
}

void HostSim::BeginSegment(int core) {
  Core& c = cores_[core];
  Proc& p = procs_[c.running];
  double work;
  if (p.role == ProcRole::kWorker) {
    const Sandbox& sb = sandboxes_[p.sandbox];
    work = sb.locked_left > kEps ? sb.locked_left : sb.unlocked_left;
  } else {
    work = p.pending_work;
  }
  double span = p.pending_stall + std::max(work, 0.0);
  if (span < kEps) span = kEps;  // force a timer to resolve state
  double quantum = span;
  if (CompetitorWaiting(core, p)) {
    if (p.cls == SchedClass::kOther) {
      quantum = std::min(quantum, cfg_.other_tick);
    } else {
      quantum = std::min(quantum, std::max(p.slice_left, kEps));
    }
  }
  p.seg_start = now_;
  p.seg_end = NextInstant(now_, quantum);
  c.gen++;
  Push(p.seg_end, Ev::kCoreTimer, core, c.gen);
}

void HostSim::AccountSegment(int core) {
  Core& c = cores_[core];
  if (c.running < 0) return;
  Proc& p = procs_[c.running];
  double dt = now_ - p.seg_start;
  if (dt <= 0) return;

  double stall = std::min(dt, p.pending_stall);
  p.pending_stall -= stall;
  if (p.pending_stall < kEps) p.pending_stall = 0;
  double exec = dt - stall;

  p.ctr.cycles += dt * cfg_.clock_hz;
  p.ctr.instructions += exec * cfg_.clock_hz;
  p.t_run += dt;
  if (p.cls == SchedClass::kOther) {
    p.vruntime += dt;
  } else {
    p.slice_left -= dt;
  }

  if (exec > 0) {
    if (p.role == ProcRole::kWorker) {
      Sandbox& sb = sandboxes_[p.sandbox];
      App& a = apps_[p.app];
      double e = exec;
      if (sb.locked_left > 0) {
        double take = std::min(e, sb.locked_left);
        sb.locked_left -= take;
        if (sb.locked_left < kEps) sb.locked_left = 0;
        a.demand_done += take;
        e -= take;
      }
      if (e > 0) {
        sb.unlocked_left -= e;
        if (sb.unlocked_left < kEps) sb.unlocked_left = 0;
        a.demand_done += e;
      }
    } else {
      p.pending_work -= exec;
      if (p.pending_work < kEps) p.pending_work = 0;
    }
  }
  p.seg_start = now_;
}

void HostSim::StopRunning(int core, bool voluntary, RunState next) {
  Core& c = cores_[core];
  int pid = c.running;
  assert(pid >= 0);
  AccountSegment(core);
  Proc& p = procs_[pid];
  c.running = -1;
  c.gen++;  // cancel the outstanding segment timer
  p.core = -1;
  p.last_core = core;
  if (voluntary) {
    p.ctr.vcs += 1;
  } else {
    p.ctr.nvcs += 1;
  }
  Transition(p, next);
  Trace("stop", core, pid, p.app, voluntary ? "voluntary" : "involuntary");
}

void HostSim::EnsureTimerBound(int core) {
  Core& c = cores_[core];
  int pid = c.running;
  if (pid < 0) return;
  Proc& p = procs_[pid];
  if (!CompetitorWaiting(core, p)) return;
  double bound;
  if (p.cls == SchedClass::kOther) {
    bound = now_ + cfg_.other_tick;
  } else {
    double used = now_ - p.seg_start;
    double rem = p.slice_left - used;
    bound = now_ + std::max(rem, kEps);
  }
  if (p.seg_end > bound + kEps) RetimeCore(core, bound);
}

void HostSim::RetimeCore(int core, double when) {
  Core& c = cores_[core];
  Proc& p = procs_[c.running];
  c.gen++;
  p.seg_end = NextInstant(now_, std::max(when - now_, 0.0));
  Push(p.seg_end, Ev::kCoreTimer, core, c.gen);
}

double HostSim::MinOtherVruntime() const {
  double best = -1;
  double fallback = 0;
  for (const Proc& p : procs_) {
    if (!p.alive || p.cls != SchedClass::kOther) continue;
    fallback = std::max(fallback, p.vruntime);
    if (p.state != RunState::kRunnable && p.state != RunState::kRunning)
      continue;
    if (best < 0 || p.vruntime < best) best = p.vruntime;
  }
  return best >= 0 ? best : fallback;
}

void HostSim::ClampVruntime(Proc& p) {
  p.vruntime = std::max(p.vruntime, MinOtherVruntime());
}

// ---------------------------------------------------------------------------
// Requests and sandboxes.

void HostSim::Autoscale(int app) {
  App& a = apps_[app];
  int cap = std::max(1, cfg_.max_procs_per_app / 3);
  double lam =
      cfg_.autoscale_observed ? ObservedRate(app) : a.spec.arrival_rate;
  int target =
      lam <= 0 ? 1
               : std::min(cap, RequiredServers(lam, a.spec.mean_service_time,
                                               cfg_.rho_target));
  a.target = std::max(1, target);

  std::vector<int> pool;  // alive, not retiring
  for (int sbx : a.sandboxes) {
    Sandbox& sb = sandboxes_[sbx];
    if (!sb.alive) continue;
    if (sb.retiring && static_cast<int>(pool.size()) < a.target) {
      sb.retiring = false;  // demand came back before it drained
    }
    if (!sb.retiring) pool.push_back(sbx);
  }

  while (static_cast<int>(pool.size()) < a.target)
    pool.push_back(SpawnSandbox(app, false));

  int excess = static_cast<int>(pool.size()) - a.target;
  if (excess <= 0) return;
  // Shed cold spawns first, then idle warm boxes, newest first; busy boxes
  // drain out after their current request.
  for (auto it = pool.rbegin(); excess > 0 && it != pool.rend(); ++it) {
    Sandbox& sb = sandboxes_[*it];
    if (!sb.warm && !sb.busy) {
      RemoveSandbox(*it);
      --excess;
    }
  }
  for (auto it = pool.rbegin(); excess > 0 && it != pool.rend(); ++it) {
    Sandbox& sb = sandboxes_[*it];
    if (sb.alive && sb.warm && !sb.busy) {
      RemoveSandbox(*it);
      --excess;
    }
  }
  for (auto it = pool.begin(); excess > 0 && it != pool.end(); ++it) {
    Sandbox& sb = sandboxes_[*it];
    if (sb.alive && sb.busy && !sb.retiring) {
      sb.retiring = true;
      --excess;
    }
  }
}

int HostSim::SpawnSandbox(int app, bool warm) {
  App& a = apps_[app];
  int id = static_cast<int>(sandboxes_.size());
  Sandbox sb;
  sb.id = id;
  sb.app = app;
  double vfloor = MinOtherVruntime();
  auto mkproc = [&](ProcRole role) {
    Proc p;
    p.pid = static_cast<int>(procs_.size());
    p.app = app;
    p.role = role;
    p.cls = a.p_id >= 1 ? SchedClass::kRoundRobin : SchedClass::kOther;
    p.prio = a.p_id;
    p.sandbox = id;
    p.vruntime = vfloor;
    p.state_since = now_;
    p.last_core = p.pid % cfg_.num_cores;
    procs_.push_back(p);
    return p.pid;
  };
  sb.worker = mkproc(ProcRole::kWorker);
  sb.shim = mkproc(ProcRole::kShim);
  sb.aux = mkproc(ProcRole::kAuxiliary);
  sb.warm = warm;
  sb.warm_at = warm ? now_ : now_ + cfg_.cold_start_delay;
  sandboxes_.push_back(sb);
  a.sandboxes.push_back(id);
  if (!warm) Push(now_ + cfg_.cold_start_delay, Ev::kSandboxReady, id);
  Trace("spawn", -1, sb.worker, app, warm ? "warm" : "cold");
  return id;
}

void HostSim::RemoveSandbox(int sbx) {
  Sandbox& sb = sandboxes_[sbx];
  if (!sb.alive) return;
  if (sb.busy) {  // never tear down mid-request
    sb.retiring = true;
    return;
  }
  App& a = apps_[sb.app];
  for (int pid : {sb.worker, sb.shim, sb.aux}) {
    Proc& p = procs_[pid];
    if (p.state == RunState::kRunning) {
      StopRunning(p.core, true, RunState::kSleeping);
      Reschedule(p.last_core);
    } else if (p.state != RunState::kSleeping) {
      Transition(p, RunState::kSleeping);
    }
    FoldCounters(&a.retired, p.ctr);
    p.alive = false;
  }
  sb.alive = false;
  sb.warm = false;
  std::erase(a.sandboxes, sbx);
  Trace("retire", -1, sb.worker, sb.app, "");
}

void HostSim::TryDispatch(int app) {
  App& a = apps_[app];
  while (!a.queue.empty()) {
    int pick = -1;
    for (int sbx : a.sandboxes) {
      const Sandbox& sb = sandboxes_[sbx];
      if (sb.alive && sb.warm && !sb.busy && !sb.retiring) {
        pick = sbx;
        break;
      }
    }
    if (pick < 0) return;
    auto [arr, demand] = a.queue.front();
    a.queue.pop_front();
    Sandbox& sb = sandboxes_[pick];
    sb.busy = true;
    sb.arrival = arr;
    sb.start_exec = now_;
    sb.cold = sb.warm_at > arr + kEps;  // request waited on container warmup
    if (sb.cold) a.cold_starts++;
    bool locked = a.spec.uses_futex_lock && cfg_.futex_enabled &&
                  cfg_.locked_fraction > 0;
    sb.locked_left = locked ? cfg_.locked_fraction * demand : 0;
    sb.unlocked_left = demand - sb.locked_left;
    sb.holds_lock = false;
    if (cfg_.sidecar_noise && cfg_.sidecar_wake > 0) {
      WakeSidecar(sb.shim);
      WakeSidecar(sb.aux);
    }
    if (sb.locked_left > kEps) {
      if (a.lock_held) {
        Proc& w = procs_[sb.worker];
        w.ctr.vcs += 1;  // futex wait parks the worker
        Transition(w, RunState::kBlocked);
        a.lock_waiters.push_back(pick);
        Trace("block", -1, sb.worker, app, "lock");
      } else {
        a.lock_held = true;
        sb.holds_lock = true;
        MakeRunnable(sb.worker);
      }
    } else {
      MakeRunnable(sb.worker);
    }
  }
}

void HostSim::CompleteRequest(int core, int sbx) {
  Sandbox& sb = sandboxes_[sbx];
  App& a = apps_[sb.app];
  StopRunning(core, true, RunState::kSleeping);
  result_.records.push_back(
      RequestRecord{sb.app, sb.arrival, sb.start_exec, now_, sb.cold});
  a.completions_total++;
  a.win_completions++;
  InSystemAdd(sb.app, -1);
  sb.busy = false;
  sb.holds_lock = false;
  if (cfg_.sidecar_noise && cfg_.sidecar_wake > 0) {
    WakeSidecar(sb.shim);
    WakeSidecar(sb.aux);
  }
  if (sb.retiring) RemoveSandbox(sbx);
  TryDispatch(sb.app);
  Reschedule(core);
}

void HostSim::ReleaseLock(int app, int sbx) {
  App& a = apps_[app];
  sandboxes_[sbx].holds_lock = false;
  if (a.lock_waiters.empty()) {
    a.lock_held = false;
    return;
  }
  int nxt = a.lock_waiters.front();
  a.lock_waiters.pop_front();
  Sandbox& ns = sandboxes_[nxt];
  ns.holds_lock = true;
  Trace("unblock", -1, ns.worker, app, "lock");
  MakeRunnable(ns.worker);
}

void HostSim::WakeSidecar(int pid) {
  Proc& p = procs_[pid];
  if (!p.alive) return;
  p.pending_work += cfg_.sidecar_wake;
  if (p.state == RunState::kSleeping) MakeRunnable(pid);
}

void HostSim::InSystemAdd(int app, int delta) {
  App& a = apps_[app];
  a.in_system_integral += a.in_system * (now_ - a.in_system_t);
  a.in_system_t = now_;
  a.in_system += delta;
}

// ---------------------------------------------------------------------------
// Enforcement.

EnforceResult HostSim::ApplySchedPolicy(int app, int priority, int alloc) {
  if (app < 0 || app >= app_count())
    throw std::invalid_argument("bad app index");
  for (int c = 0; c < cfg_.num_cores; ++c) AccountSegment(c);
  App& a = apps_[app];

  auto reject = [&](EnforceStatus st) {
    for (int c : a.dedicated) dedicated_owner_[c] = -1;
    a.dedicated.clear();
    a.a_id = 0;
    a.mask = full_mask_;
    a.p_id = 0;
    double vfloor = MinOtherVruntime();
    for (Proc& p : procs_) {
      if (p.app != app || !p.alive) continue;
      p.cls = SchedClass::kOther;
      p.prio = 0;
      p.vruntime = std::max(p.vruntime, vfloor);
    }
    result_.totals.enforcement_rejections++;
    Trace("reject", -1, -1, app, "policy reset");
    AfterPolicyChange();
    return EnforceResult{st};
  };

  if (priority != kRevoke && (priority < 1 || priority > 99))
    return reject(EnforceStatus::kRejectedPriority);
  if (alloc != kRevoke && alloc < 0)
    return reject(EnforceStatus::kRejectedAllocation);
  if (alloc != kRevoke && alloc > 0 &&
      alloc + dedicated_elsewhere(app) > cfg_.num_cores - 1)
    return reject(EnforceStatus::kRejectedReserve);

  a.p_id = priority == kRevoke ? 0 : priority;
  double vfloor = MinOtherVruntime();
  for (Proc& p : procs_) {
    if (p.app != app || !p.alive) continue;
    p.cls = a.p_id >= 1 ? SchedClass::kRoundRobin : SchedClass::kOther;
    p.prio = a.p_id;
    if (p.cls == SchedClass::kOther) p.vruntime = std::max(p.vruntime, vfloor);
  }

  for (int c : a.dedicated) dedicated_owner_[c] = -1;
  a.dedicated.clear();
  if (alloc == kRevoke || alloc == 0) {
    a.a_id = 0;
    a.mask = full_mask_;
  } else {
    a.a_id = alloc;
    for (int c = 0; c < cfg_.num_cores && static_cast<int>(a.dedicated.size()) < alloc; ++c) {
      if (dedicated_owner_[c] < 0) {
        dedicated_owner_[c] = app;
        a.dedicated.push_back(c);
      }
    }
    uint64_t m = 0;
    for (int c : a.dedicated) m |= 1ull << c;
    a.mask = m;
  }

  Trace("enforce", -1, -1, app,
        "p=" + std::to_string(a.p_id) + " a=" + std::to_string(a.a_id));
  AfterPolicyChange();
  return EnforceResult{EnforceStatus::kApplied};
}

void HostSim::SetAffinityMask(int app, uint64_t mask) {
  if (app < 0 || app >= app_count())
    throw std::invalid_argument("bad app index");
  if ((mask & full_mask_) == 0)
    throw std::invalid_argument("affinity mask selects no core");
  for (int c = 0; c < cfg_.num_cores; ++c) AccountSegment(c);
  apps_[app].mask = mask & full_mask_;
  AfterPolicyChange();
}

void HostSim::AfterPolicyChange() {
  for (int c = 0; c < cfg_.num_cores; ++c) {
    int pid = cores_[c].running;
    if (pid >= 0 && !Eligible(procs_[pid], c))
      StopRunning(c, false, RunState::kRunnable);
  }
  for (int c = 0; c < cfg_.num_cores; ++c) Reschedule(c);
  for (Proc& p : procs_)
    if (p.alive && p.state == RunState::kRunnable) TryPlace(p.pid);
  for (int c = 0; c < cfg_.num_cores; ++c) EnsureTimerBound(c);
}

// ---------------------------------------------------------------------------
// iTLB model.

int64_t HostSim::AddressKey(const Proc& p) const {
  return p.app >= 0 ? p.app : -100 - p.pid;
}

double HostSim::Footprint(const Proc& p) const {
  return p.app >= 0 ? apps_[p.app].spec.code_footprint
                    : cfg_.background_footprint;
}

void HostSim::ChargeItlb(int core, Proc& p) {
  Core& c = cores_[core];
  int64_t key = AddressKey(p);
  if (c.last_key == key) return;
  c.last_key = key;
  if (!cfg_.itlb_enabled) return;
  p.ctr.itlb_flushes += 1;
  double misses = cfg_.k_miss * Footprint(p);
  p.ctr.itlb_misses += misses;
  p.pending_stall += misses * cfg_.penalty_cycles / cfg_.clock_hz;
}

// ---------------------------------------------------------------------------
// Windows, audits, finalization.

Counters HostSim::CumCounters(const App& a) const {
  Counters cum = a.retired;
  for (int sbx : a.sandboxes) {
    const Sandbox& sb = sandboxes_[sbx];
    if (!sb.alive) continue;
    for (int pid : {sb.worker, sb.shim, sb.aux}) {
      const Proc& p = procs_[pid];
      if (p.alive) FoldCounters(&cum, p.ctr);
    }
  }
  return cum;
}

void HostSim::BuildWindowSnapshot(WindowSnapshot* snap) {
  for (int c = 0; c < cfg_.num_cores; ++c) AccountSegment(c);
  snap->index = window_index_;
  snap->t0 = cfg_.window * window_index_;
  snap->t1 = now_;
  snap->num_cores = cfg_.num_cores;
  std::vector<double> slowdowns;
  slowdowns.reserve(apps_.size());
  for (App& a : apps_) {
    AppWindow w;
    w.app = a.index;
    w.id = a.spec.id;
    for (int sbx : a.sandboxes) {
      const Sandbox& sb = sandboxes_[sbx];
      if (!sb.alive) continue;
      for (int pid : {sb.worker, sb.shim, sb.aux})
        if (procs_[pid].alive) w.pids.push_back(pid);
    }
    std::sort(w.pids.begin(), w.pids.end());
    w.p_id = a.p_id;
    w.a_id = a.a_id;
    w.f_lock = a.spec.uses_futex_lock;
    Counters cum = CumCounters(a);
    w.wait = std::max(0.0, cum.cpu_wait_time - a.win_base.cpu_wait_time);
    w.nvcs = std::max(0.0, cum.nvcs - a.win_base.nvcs);
    w.misses = std::max(0.0, cum.itlb_misses - a.win_base.itlb_misses);
    w.flushes = std::max(0.0, cum.itlb_flushes - a.win_base.itlb_flushes);
    w.vcs = std::max(0.0, cum.vcs - a.win_base.vcs);
    w.instructions = std::max(0.0, cum.instructions - a.win_base.instructions);
    w.cycles = std::max(0.0, cum.cycles - a.win_base.cycles);
    w.slowdown = w.cycles > kEps ? w.instructions / w.cycles : 1.0;
    w.sandboxes = SandboxCount(a.index);
    w.lambda_obs = ObservedRate(a.index);
    w.arrivals = a.win_arrivals;
    w.completions = a.win_completions;
    slowdowns.push_back(std::max(w.slowdown, 1e-9));
    snap->apps.push_back(std::move(w));
  }
  snap->fairness = slowdowns.empty() ? 1.0 : Fairness(slowdowns);
}

void HostSim::Trace(const char* kind, int core, int pid, int app,
                    const std::string& detail) {
  if (!trace_.is_open()) return;
  trace_ << now_ << ',' << kind << ',' << core << ',' << pid << ',' << app
         << ',' << detail << '\n';
}

void HostSim::AuditInvariants() const {
  int cap = std::max(1, cfg_.max_procs_per_app / 3);
  for (const App& a : apps_) {
    int procs_alive = 0, boxes = 0;
    for (int sbx : a.sandboxes) {
      const Sandbox& sb = sandboxes_[sbx];
      if (!sb.alive) continue;
      boxes++;
      for (int pid : {sb.worker, sb.shim, sb.aux})
        if (procs_[pid].alive) procs_alive++;
    }
    if (procs_alive > cfg_.max_procs_per_app)
      throw std::logic_error("per-app process cap exceeded: " + a.spec.id);
    if (boxes > cap)
      throw std::logic_error("sandbox cap exceeded: " + a.spec.id);
  }
  auto rank = [this](const Proc& p) {
    return p.cls == SchedClass::kRoundRobin ? p.prio : 0;
  };
  for (int c = 0; c < cfg_.num_cores; ++c) {
    int pid = cores_[c].running;
    if (pid >= 0 && !Eligible(procs_[pid], c))
      throw std::logic_error("ineligible process on core");
    for (const Proc& p : procs_) {
      if (!p.alive || p.state != RunState::kRunnable || !Eligible(p, c))
        continue;
      if (pid < 0)
        throw std::logic_error("idle core with eligible runnable process");
      if (rank(p) > rank(procs_[pid]))
        throw std::logic_error("higher-priority process left waiting");
    }
  }
}

void HostSim::FinalizeAccounting() {
  now_ = cfg_.horizon;
  for (int c = 0; c < cfg_.num_cores; ++c) AccountSegment(c);
  SimTotals& t = result_.totals;
  t.horizon = cfg_.horizon;
  for (App& a : apps_) {
    a.in_system_integral += a.in_system * (now_ - a.in_system_t);
    a.in_system_t = now_;
    t.demand_seconds.push_back(a.demand_done);
    t.in_system_avg.push_back(a.in_system_integral / cfg_.horizon);
    t.dropped.push_back(a.dropped);
    t.cold_starts.push_back(a.cold_starts);
  }
}

SimResult Run(const HostConfig& cfg, const std::vector<FunctionSpec>& specs,
              const std::vector<RequestStream>& streams,
              Controller* controller) {
  HostSim sim(cfg, specs, streams);
  return sim.Run(controller);
}

}  // namespace faasim
