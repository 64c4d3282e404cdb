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

#ifndef FAASIM_MONITOR_H_
#define FAASIM_MONITOR_H_

#include <array>
#include <span>
#include <vector>

#include "faasim/host.h"
#include "faasim/workload.h"

namespace faasim {

// Raw observation vector for one app over one window, before any
// preprocessing.  p_id = 0 encodes SCHED_OTHER.
struct AppState {
  std::array<double, 3> s_cont{0, 0, 0};  // cpu_wait_time, nvcs, itlb_misses
  double s_fair = 1.0;
  bool f_lock = false;
  std::vector<int> f_pid;
  double p_id = 0;
  double a_id = 0;
  double p_low = 0;    // other apps' RT processes at or below own priority
  double p_high = 0;   // strictly above
  double a_other = 0;  // dedicated cores held by other apps
};

// min(slowdowns) / max(slowdowns); all entries must be positive.
double Fairness(std::span<const double> slowdowns);

// Contention triple for one app out of a finished window snapshot.
std::array<double, 3> CollectWindow(const WindowSnapshot& snap, int app);

// Lock usage comes from the deployment registry, not from runtime
// sampling, so it is exact and immediate.
bool DetectLockUsage(const FunctionSpec& spec);

// Full observation for `app`; pure function of the snapshot.
AppState AssembleState(const WindowSnapshot& snap, int app);

}  // namespace faasim

#endif  // FAASIM_MONITOR_H_
