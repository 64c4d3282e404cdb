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

#include "faasim/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "faasim/baselines.h"
#include "faasim/metrics.h"

namespace faasim {
namespace {

double ParseDouble(const std::string& tok) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw std::runtime_error("bad number: '" + tok + "'");
  return v;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int Col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("missing CSV column: " + name);
  }
};

CsvTable ReadCsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  if (std::getline(is, line)) t.header = SplitCsv(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(SplitCsv(line));
  }
  return t;
}

double SafeVariance(std::span<const double> xs) {
  return xs.size() >= 2 ? PopulationVariance(xs) : 0.0;
}

double SafeIqr(std::span<const double> xs) {
  return xs.empty() ? 0.0 : Iqr(xs);
}

double SafeCov(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  if (Mean(xs) == 0) return 0.0;
  return CoefficientOfVariation(xs);
}

std::string UtcNow() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* DeltaName(Delta d) {
  switch (d) {
    case Delta::kNegInf:
      return "revoke";
    case Delta::kDown:
      return "down";
    case Delta::kHold:
      return "hold";
    case Delta::kUp:
      return "up";
  }
  return "?";
}

void CheckStream(const std::ofstream& os, const std::string& path) {
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number format failed");
  return std::string(buf, end);
}

const AppCalibration* Calibration::Find(const std::string& id) const {
  for (const AppCalibration& a : apps)
    if (a.id == id) return &a;
  return nullptr;
}

std::vector<FunctionSpec> SelectSpecs(const ExperimentConfig& cfg) {
  std::vector<FunctionSpec> all = cfg.catalog_path.empty()
                                      ? BuiltinCatalog()
                                      : LoadCatalog(cfg.catalog_path);
  if (cfg.apps.empty()) return all;
  std::vector<FunctionSpec> out;
  for (const std::string& id : cfg.apps) out.push_back(CatalogEntry(all, id));
  return out;
}

Calibration Calibrate(const ExperimentConfig& cfg,
                      const std::vector<FunctionSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("no apps to calibrate");
  Calibration cal;
  cal.bounds.num_cores = cfg.host.num_cores;

  HostConfig solo_host = cfg.host;
  solo_host.horizon = cfg.calibration_horizon;
  solo_host.background_tasks = 0;  // isolated means the app truly alone
  solo_host.trace_path.clear();

  for (const FunctionSpec& spec : specs) {
    std::vector<FunctionSpec> one{spec};
    SimResult res =
        Run(solo_host, one, MakeStreams(one, cfg.workload_seed), nullptr);
    AppCalibration a;
    a.id = spec.id;
    std::vector<double> exec, resp;
    for (const RequestRecord& r : res.records) {
      exec.push_back(r.execution_latency());
      resp.push_back(r.response_latency());
    }
    a.completions = static_cast<int64_t>(res.records.size());
    if (!exec.empty()) {
      a.exec_mean = Mean(exec);
      a.exec_var = SafeVariance(exec);
      a.exec_iqr = SafeIqr(exec);
      a.resp_mean = Mean(resp);
      a.resp_var = SafeVariance(resp);
      a.resp_iqr = SafeIqr(resp);
    }
    if (!res.windows.empty()) {
      std::vector<double> slow;
      for (const WindowSnapshot& w : res.windows) {
        a.cont_mean[0] += w.apps[0].wait;
        a.cont_mean[1] += w.apps[0].nvcs;
        a.cont_mean[2] += w.apps[0].misses;
        slow.push_back(w.apps[0].slowdown);
      }
      for (double& v : a.cont_mean) v /= static_cast<double>(res.windows.size());
      a.slowdown_mean = Mean(slow);
    }
    cal.apps.push_back(std::move(a));
  }

  // Feature scaling ranges come from colocation under the stock scheduler,
  // where contention actually shows up.
  HostConfig colo_host = cfg.host;
  colo_host.horizon = cfg.calibration_horizon;
  colo_host.trace_path.clear();
  LassController stock;
  SimResult colo =
      Run(colo_host, specs, MakeStreams(specs, cfg.workload_seed), &stock);
  for (const WindowSnapshot& w : colo.windows) {
    for (const AppWindow& aw : w.apps) {
      cal.bounds.cont_hi[0] = std::max(cal.bounds.cont_hi[0], aw.wait);
      cal.bounds.cont_hi[1] = std::max(cal.bounds.cont_hi[1], aw.nvcs);
      cal.bounds.cont_hi[2] = std::max(cal.bounds.cont_hi[2], aw.misses);
    }
  }
  cal.bounds.cont_lo = {0, 0, 0};
  int peers = std::max(1, static_cast<int>(specs.size()) - 1);
  cal.bounds.pcount_max =
      static_cast<double>(cfg.host.max_procs_per_app) * peers;
  return cal;
}

void ApplyBaselines(std::vector<FunctionSpec>* specs, const Calibration& cal) {
  for (FunctionSpec& s : *specs) {
    const AppCalibration* a = cal.Find(s.id);
    if (a) s.isolated_contention_baseline = a->cont_mean;
  }
}

void SaveCalibration(const Calibration& cal, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "faasim-calibration-v1\n";
  os << "bounds";
  for (double v : cal.bounds.cont_lo) os << ' ' << FormatDouble(v);
  for (double v : cal.bounds.cont_hi) os << ' ' << FormatDouble(v);
  os << ' ' << FormatDouble(cal.bounds.pcount_max) << ' '
     << cal.bounds.num_cores << '\n';
  for (const AppCalibration& a : cal.apps) {
    os << "app " << a.id << ' ' << FormatDouble(a.exec_mean) << ' '
       << FormatDouble(a.exec_var) << ' ' << FormatDouble(a.exec_iqr) << ' '
       << FormatDouble(a.resp_mean) << ' ' << FormatDouble(a.resp_var) << ' '
       << FormatDouble(a.resp_iqr) << ' ' << FormatDouble(a.cont_mean[0])
       << ' ' << FormatDouble(a.cont_mean[1]) << ' '
       << FormatDouble(a.cont_mean[2]) << ' '
       << FormatDouble(a.slowdown_mean) << ' ' << a.completions << '\n';
  }
  CheckStream(os, path);
}

Calibration LoadCalibration(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string tag;
  if (!(is >> tag) || tag != "faasim-calibration-v1")
    throw std::runtime_error("not a calibration file: " + path);
  Calibration cal;
  std::string tok;
  if (!(is >> tok) || tok != "bounds")
    throw std::runtime_error("calibration: expected bounds");
  for (int i = 0; i < 3; ++i) {
    is >> tok;
    cal.bounds.cont_lo[i] = ParseDouble(tok);
  }
  for (int i = 0; i < 3; ++i) {
    is >> tok;
    cal.bounds.cont_hi[i] = ParseDouble(tok);
  }
  is >> tok;
  cal.bounds.pcount_max = ParseDouble(tok);
  if (!(is >> cal.bounds.num_cores))
    throw std::runtime_error("calibration: bad bounds");
  while (is >> tag) {
    if (tag != "app") throw std::runtime_error("calibration: expected app");
    AppCalibration a;
    is >> a.id;
    auto next = [&is, &tok]() {
      if (!(is >> tok)) throw std::runtime_error("calibration: truncated");
      return ParseDouble(tok);
    };
    a.exec_mean = next();
    a.exec_var = next();
    a.exec_iqr = next();
    a.resp_mean = next();
    a.resp_var = next();
    a.resp_iqr = next();
    a.cont_mean[0] = next();
    a.cont_mean[1] = next();
    a.cont_mean[2] = next();
    a.slowdown_mean = next();
    if (!(is >> a.completions))
      throw std::runtime_error("calibration: truncated");
    cal.apps.push_back(std::move(a));
  }
  return cal;
}

RunOutputs RunWithController(const ExperimentConfig& cfg,
                             std::vector<FunctionSpec> specs,
                             const Checkpoint* ckpt) {
  std::unique_ptr<Controller> ctl;
  FaaschedController* fc = nullptr;
  const std::string& name = cfg.controller;
  if (name == "lass") {
    ctl = std::make_unique<LassController>();
  } else if (name == "rid" || name == "fp" || name == "si" || name == "sd") {
    PriorityScheme scheme = PriorityScheme::kRandomDelta;
    if (name == "fp") scheme = PriorityScheme::kFixed;
    if (name == "si") scheme = PriorityScheme::kStepIncrease;
    if (name == "sd") scheme = PriorityScheme::kStepDecrease;
    ctl = std::make_unique<SchemeController>(scheme, cfg.priority_step,
                                             cfg.fixed_priority,
                                             cfg.agent.seed);
  } else if (name == "partition") {
    int n = cfg.host.num_cores;
    int ls = cfg.partition_ls, ld = cfg.partition_ld;
    if (ls <= 0 && ld <= 0) ls = (n + 1) / 2;
    if (ls <= 0) ls = n - ld;
    if (ld <= 0) ld = n - ls;
    ctl = std::make_unique<PartitionController>(PartitionCores(ls, ld, n));
  } else if (name == "faasched") {
    if (!ckpt)
      throw std::invalid_argument("faasched runs need a trained checkpoint");
    FaaschedConfig f;
    f.agent = ckpt->config;
    f.bounds = ckpt->bounds;
    f.train = false;
    auto owned = std::make_unique<FaaschedController>(f, ckpt->agent);
    fc = owned.get();
    ctl = std::move(owned);
  } else {
    throw std::invalid_argument("unknown controller '" + name + "'");
  }

  HostSim sim(cfg.host, specs, MakeStreams(specs, cfg.workload_seed));
  RunOutputs out;
  out.result = sim.Run(ctl.get());
  if (fc) {
    out.decisions = fc->decisions();
    out.agent_updates = fc->agent().updates();
    out.agent_skipped = fc->agent().skipped_updates();
  }
  return out;
}

TrainOutputs TrainAgent(const ExperimentConfig& cfg,
                        std::vector<FunctionSpec> specs,
                        const std::string& checkpoint_path) {
  TrainOutputs out;
  out.calibration = Calibrate(cfg, specs);
  ApplyBaselines(&specs, out.calibration);

  FaaschedConfig f;
  f.agent = cfg.agent;
  f.bounds = out.calibration.bounds;
  f.train = true;
  f.explore_hi = cfg.explore_hi;
  f.explore_lo = cfg.explore_lo;
  f.total_duration = cfg.host.horizon;
  FaaschedController ctl(f, A2cAgent(cfg.agent));

  HostSim sim(cfg.host, specs, MakeStreams(specs, cfg.workload_seed));
  out.run.result = sim.Run(&ctl);
  out.run.decisions = ctl.decisions();
  out.run.agent_updates = ctl.agent().updates();
  out.run.agent_skipped = ctl.agent().skipped_updates();

  SaveCheckpoint(checkpoint_path, ctl.agent(), out.calibration.bounds);
  return out;
}

// ---------------------------------------------------------------------------
// Output files.

void WriteRequestsCsv(const SimResult& res,
                      const std::vector<FunctionSpec>& specs,
                      const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "app,arrival,start_exec,completion,execution_latency,"
        "response_latency,cold_start\n";
  for (const RequestRecord& r : res.records) {
    os << specs[r.app].id << ',' << FormatDouble(r.arrival) << ','
       << FormatDouble(r.start_exec) << ',' << FormatDouble(r.completion)
       << ',' << FormatDouble(r.execution_latency()) << ','
       << FormatDouble(r.response_latency()) << ',' << (r.cold_start ? 1 : 0)
       << '\n';
  }
  CheckStream(os, path);
}

void WriteWindowsCsv(const SimResult& res, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "window,t0,t1,fairness,app,id,p_id,a_id,f_lock,sandboxes,arrivals,"
        "completions,lambda_obs,wait,nvcs,vcs,flushes,misses,instructions,"
        "cycles,slowdown\n";
  for (const WindowSnapshot& w : res.windows) {
    for (const AppWindow& a : w.apps) {
      os << w.index << ',' << FormatDouble(w.t0) << ',' << FormatDouble(w.t1)
         << ',' << FormatDouble(w.fairness) << ',' << a.app << ',' << a.id
         << ',' << a.p_id << ',' << a.a_id << ',' << (a.f_lock ? 1 : 0) << ','
         << a.sandboxes << ',' << a.arrivals << ',' << a.completions << ','
         << FormatDouble(a.lambda_obs) << ',' << FormatDouble(a.wait) << ','
         << FormatDouble(a.nvcs) << ',' << FormatDouble(a.vcs) << ','
         << FormatDouble(a.flushes) << ',' << FormatDouble(a.misses) << ','
         << FormatDouble(a.instructions) << ',' << FormatDouble(a.cycles)
         << ',' << FormatDouble(a.slowdown) << '\n';
    }
  }
  CheckStream(os, path);
}

void WriteDecisionsCsv(const std::vector<DecisionRecord>& decisions,
                       const std::vector<FunctionSpec>& specs,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "window,app,id,action,dp,da,explore,applied,updated,p_before,"
        "a_before,p_after,a_after,value,reward,td_error\n";
  for (const DecisionRecord& d : decisions) {
    Action a = ActionFromId(d.action);
    os << d.window << ',' << d.app << ',' << specs[d.app].id << ','
       << d.action << ',' << DeltaName(a.dp) << ',' << DeltaName(a.da) << ','
       << (d.explore ? 1 : 0) << ',' << (d.applied ? 1 : 0) << ','
       << (d.updated ? 1 : 0) << ',' << d.p_before << ',' << d.a_before << ','
       << d.p_after << ',' << d.a_after << ',' << FormatDouble(d.value) << ','
       << FormatDouble(d.reward) << ',' << FormatDouble(d.td_error) << '\n';
  }
  CheckStream(os, path);
}

void WriteSummaryCsv(const SimResult& res,
                     const std::vector<FunctionSpec>& specs,
                     const Calibration* cal, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "app,kind,mean,variance,iqr,cov,n,normalized_mean,"
        "normalized_variance,normalized_iqr\n";
  for (size_t i = 0; i < specs.size(); ++i) {
    std::vector<double> exec, resp;
    for (const RequestRecord& r : res.records) {
      if (r.app != static_cast<int>(i)) continue;
      exec.push_back(r.execution_latency());
      resp.push_back(r.response_latency());
    }
    const AppCalibration* a = cal ? cal->Find(specs[i].id) : nullptr;
    auto row = [&](const char* kind, std::span<const double> xs,
                   double iso_mean, double iso_var, double iso_iqr) {
      double mean = xs.empty() ? 0.0 : Mean(xs);
      double var = SafeVariance(xs);
      double iqr = SafeIqr(xs);
      os << specs[i].id << ',' << kind << ',' << FormatDouble(mean) << ','
         << FormatDouble(var) << ',' << FormatDouble(iqr) << ','
         << FormatDouble(SafeCov(xs)) << ',' << xs.size() << ',';
      if (a && iso_mean > 0) os << FormatDouble(NormalizeToIsolated(mean, iso_mean));
      os << ',';
      if (a && iso_var > 0) os << FormatDouble(NormalizeToIsolated(var, iso_var));
      os << ',';
      if (a && iso_iqr > 0) os << FormatDouble(NormalizeToIsolated(iqr, iso_iqr));
      os << '\n';
    };
    row("exec", exec, a ? a->exec_mean : 0, a ? a->exec_var : 0,
        a ? a->exec_iqr : 0);
    row("resp", resp, a ? a->resp_mean : 0, a ? a->resp_var : 0,
        a ? a->resp_iqr : 0);
  }
  CheckStream(os, path);
}

void WriteMetadata(const ExperimentConfig& cfg,
                   const std::vector<FunctionSpec>& specs,
                   const RunOutputs& out, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  const HostConfig& h = cfg.host;
  const AgentConfig& a = cfg.agent;
  os << "generated_at = " << UtcNow() << '\n';
  os << "controller = " << cfg.controller << '\n';
  os << "workload_seed = " << cfg.workload_seed << '\n';
  os << "apps =";
  for (const FunctionSpec& s : specs) os << ' ' << s.id;
  os << '\n';
  os << "num_cores = " << h.num_cores << '\n';
  os << "horizon = " << FormatDouble(h.horizon) << '\n';
  os << "window = " << FormatDouble(h.window) << '\n';
  os << "rr_slice = " << FormatDouble(h.rr_slice) << '\n';
  os << "other_tick = " << FormatDouble(h.other_tick) << '\n';
  os << "cold_start_delay = " << FormatDouble(h.cold_start_delay) << '\n';
  os << "rho_target = " << FormatDouble(h.rho_target) << '\n';
  os << "max_procs_per_app = " << h.max_procs_per_app << '\n';
  os << "prewarm = " << h.prewarm << '\n';
  os << "autoscale_observed = " << h.autoscale_observed << '\n';
  os << "rate_window = " << FormatDouble(h.rate_window) << '\n';
  os << "queue_capacity = " << h.queue_capacity << '\n';
  os << "sidecar_noise = " << h.sidecar_noise << '\n';
  os << "sidecar_wake = " << FormatDouble(h.sidecar_wake) << '\n';
  os << "itlb_enabled = " << h.itlb_enabled << '\n';
  os << "k_miss = " << FormatDouble(h.k_miss) << '\n';
  os << "penalty_cycles = " << FormatDouble(h.penalty_cycles) << '\n';
  os << "clock_hz = " << FormatDouble(h.clock_hz) << '\n';
  os << "futex_enabled = " << h.futex_enabled << '\n';
  os << "locked_fraction = " << FormatDouble(h.locked_fraction) << '\n';
  os << "background_tasks = " << h.background_tasks << '\n';
  os << "background_storm_rate = " << FormatDouble(h.background_storm_rate)
     << '\n';
  os << "background_storm_width = " << h.background_storm_width << '\n';
  os << "background_burst = " << FormatDouble(h.background_burst) << '\n';
  os << "background_footprint = " << FormatDouble(h.background_footprint)
     << '\n';
  os << "host_seed = " << h.seed << '\n';
  os << "alpha = " << FormatDouble(a.alpha) << '\n';
  os << "gamma = " << FormatDouble(a.gamma) << '\n';
  os << "epsilon = " << FormatDouble(a.epsilon) << '\n';
  os << "p_step = " << a.p_step << '\n';
  os << "a_step = " << a.a_step << '\n';
  os << "reward_a = " << FormatDouble(a.reward_a) << '\n';
  os << "reward_b = " << FormatDouble(a.reward_b) << '\n';
  os << "reward_c = " << FormatDouble(a.reward_c) << '\n';
  os << "tau = " << FormatDouble(a.tau) << '\n';
  os << "hidden = " << a.hidden << '\n';
  os << "agent_seed = " << a.seed << '\n';
  os << "explore_hi = " << FormatDouble(cfg.explore_hi) << '\n';
  os << "explore_lo = " << FormatDouble(cfg.explore_lo) << '\n';
  os << "requests = " << out.result.records.size() << '\n';
  os << "windows = " << out.result.windows.size() << '\n';
  os << "decisions = " << out.decisions.size() << '\n';
  os << "enforcement_rejections = "
     << out.result.totals.enforcement_rejections << '\n';
  os << "agent_updates = " << out.agent_updates << '\n';
  os << "agent_skipped_updates = " << out.agent_skipped << '\n';
  for (size_t i = 0; i < specs.size(); ++i) {
    os << "app " << specs[i].id
       << " demand_seconds=" << FormatDouble(out.result.totals.demand_seconds[i])
       << " in_system_avg=" << FormatDouble(out.result.totals.in_system_avg[i])
       << " dropped=" << out.result.totals.dropped[i]
       << " cold_starts=" << out.result.totals.cold_starts[i]
       << " isolated_baseline="
       << FormatDouble(specs[i].isolated_contention_baseline[0]) << '/'
       << FormatDouble(specs[i].isolated_contention_baseline[1]) << '/'
       << FormatDouble(specs[i].isolated_contention_baseline[2]) << '\n';
  }
  CheckStream(os, path);
}

// ---------------------------------------------------------------------------
// Report.

std::string BuildReport(const std::string& dir) {
  std::ostringstream out;
  out << "run report: " << dir << '\n';

  CsvTable win = ReadCsv(dir + "/windows.csv");
  int c_id = win.Col("id"), c_fair = win.Col("fairness");
  int c_wait = win.Col("wait"), c_nvcs = win.Col("nvcs");
  int c_miss = win.Col("misses"), c_slow = win.Col("slowdown");
  int c_cyc = win.Col("cycles");

  std::vector<double> fair, wait, nvcs, miss, slow;
  std::map<std::string, std::vector<double>> per_app_slow;
  std::map<std::string, double> last_fair_by_window;
  for (const auto& r : win.rows) {
    double cycles = ParseDouble(r[c_cyc]);
    fair.push_back(ParseDouble(r[c_fair]));
    if (cycles <= 0) continue;  // idle window rows carry no signal
    wait.push_back(ParseDouble(r[c_wait]));
    nvcs.push_back(ParseDouble(r[c_nvcs]));
    miss.push_back(ParseDouble(r[c_miss]));
    slow.push_back(ParseDouble(r[c_slow]));
    per_app_slow[r[c_id]].push_back(ParseDouble(r[c_slow]));
  }

  out << "\nfairness: windows=" << win.rows.size();
  if (!fair.empty()) {
    out << " mean=" << FormatDouble(Mean(fair)) << " min="
        << FormatDouble(*std::min_element(fair.begin(), fair.end()));
  }
  out << '\n';

  out << "\ncontention vs slowdown (Pearson over active window rows, n="
      << slow.size() << "):\n";
  auto corr = [&](const char* name, const std::vector<double>& xs) {
    out << "  " << name << ": ";
    try {
      out << FormatDouble(Pearson(xs, slow));
    } catch (const std::exception&) {
      out << "n/a";
    }
    out << '\n';
  };
  corr("cpu_wait_time", wait);
  corr("nvcs", nvcs);
  corr("itlb_misses", miss);

  out << "\nper-app mean slowdown:\n";
  const std::vector<FunctionSpec>& catalog = BuiltinCatalog();
  for (const auto& [id, xs] : per_app_slow) {
    double m = Mean(xs);
    out << "  " << id << ": " << FormatDouble(m);
    for (const FunctionSpec& s : catalog) {
      if (s.id == id) {
        out << " (effective ipc " << FormatDouble(s.isolated_ipc * m) << ")";
        break;
      }
    }
    out << '\n';
  }

  std::ifstream sum(dir + "/summary.csv");
  if (sum) {
    out << "\nlatency summary (" << dir << "/summary.csv):\n";
    std::string line;
    while (std::getline(sum, line)) out << "  " << line << '\n';
  }
  return out.str();
}

}  // namespace faasim
