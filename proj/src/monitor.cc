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

#include "faasim/monitor.h"

#include <algorithm>
#include <stdexcept>

namespace faasim {
namespace {

const AppWindow& FindApp(const WindowSnapshot& snap, int app) {
  for (const AppWindow& w : snap.apps) {
    if (w.app == app) return w;
  }
  throw std::invalid_argument("app not present in window snapshot");
}

}  // namespace

double Fairness(std::span<const double> slowdowns) {
  if (slowdowns.empty()) throw std::invalid_argument("fairness of empty set");
  double lo = slowdowns[0];
  double hi = slowdowns[0];
  for (double s : slowdowns) {
    if (s <= 0) throw std::invalid_argument("slowdowns must be positive");
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return lo / hi;
}

std::array<double, 3> CollectWindow(const WindowSnapshot& snap, int app) {
  const AppWindow& w = FindApp(snap, app);
  return {w.wait, static_cast<double>(w.nvcs), w.misses};
}

bool DetectLockUsage(const FunctionSpec& spec) { return spec.uses_futex_lock; }

AppState AssembleState(const WindowSnapshot& snap, int app) {
  const AppWindow& own = FindApp(snap, app);
  AppState st;
  st.s_cont = {own.wait, static_cast<double>(own.nvcs), own.misses};
  st.s_fair = snap.fairness;
  st.f_lock = own.f_lock;
  st.f_pid = own.pids;
  st.p_id = own.p_id;
  st.a_id = own.a_id;
  for (const AppWindow& other : snap.apps) {
    if (other.app == app) continue;
    // Only real-time processes enter the priority census; SCHED_OTHER
    // peers (p_id == 0) are invisible to it.
    if (other.p_id >= 1) {
      double n = static_cast<double>(other.pids.size());
      if (other.p_id <= own.p_id) {
        st.p_low += n;
      } else {
        st.p_high += n;
      }
    }
    st.a_other += other.a_id;
  }
  return st;
}

}  // namespace faasim
