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

#include "faasim/baselines.h"

#include <algorithm>
#include <stdexcept>

namespace faasim {

int NextPriority(PriorityScheme scheme, int current, int step, int fixed,
                 CounterRng* rng) {
  if (step <= 0) throw std::invalid_argument("step must be > 0");
  switch (scheme) {
    case PriorityScheme::kRandomDelta: {
      if (!rng) throw std::invalid_argument("random scheme needs an rng");
      int delta = rng->NextBelow(2) == 0 ? -step : step;
      return std::clamp(current + delta, 1, 99);
    }
    case PriorityScheme::kFixed:
      if (fixed < 1 || fixed > 99)
        throw std::invalid_argument("fixed priority outside [1, 99]");
      return fixed;
    case PriorityScheme::kStepIncrease:
      return std::min(current + step, 99);
    case PriorityScheme::kStepDecrease:
      return std::max(current - step, 1);
  }
  throw std::invalid_argument("unknown priority scheme");
}

PartitionSpec PartitionCores(int ls_cores, int ld_cores, int num_cores) {
  if (ls_cores < 1 || ld_cores < 1)
    throw std::invalid_argument("each partition needs at least one core");
  if (ls_cores + ld_cores != num_cores)
    throw std::invalid_argument("partition must cover the machine exactly");
  PartitionSpec spec;
  spec.ls_mask = (1ull << ls_cores) - 1;
  spec.ld_mask = ((1ull << num_cores) - 1) & ~spec.ls_mask;
  return spec;
}

SchemeController::SchemeController(PriorityScheme scheme, int step, int fixed,
                                   uint64_t seed)
    : scheme_(scheme), step_(step), fixed_(fixed), rng_(seed, 0xba5e) {}

void SchemeController::OnWindow(const WindowSnapshot& snap,
                                HostControl& host) {
  (void)snap;
  for (int i = 0; i < host.app_count(); ++i) {
    if (host.spec(i).category != LatencyClass::kSensitive) continue;
    int p = NextPriority(scheme_, host.priority_of(i), step_, fixed_, &rng_);
    host.ApplySchedPolicy(i, p, kRevoke);
  }
}

void PartitionController::OnStart(HostControl& host) {
  for (int i = 0; i < host.app_count(); ++i) {
    bool ls = host.spec(i).category == LatencyClass::kSensitive;
    host.SetAffinityMask(i, ls ? spec_.ls_mask : spec_.ld_mask);
  }
}

}  // namespace faasim
