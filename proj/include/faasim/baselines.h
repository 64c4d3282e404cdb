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

#ifndef FAASIM_BASELINES_H_
#define FAASIM_BASELINES_H_

#include <cstdint>

#include "faasim/host.h"
#include "faasim/rng.h"

namespace faasim {

// Reference controllers the learned scheduler is measured against.

// Per-window priority update rules for latency-sensitive apps.
enum class PriorityScheme {
  kRandomDelta,   // +-step with equal probability
  kFixed,         // pin to one value
  kStepIncrease,  // ratchet up to 99
  kStepDecrease,  // ratchet down to 1
};

// Next RT priority under a scheme; results stay inside [1, 99].
// rng is consulted only by kRandomDelta.
int NextPriority(PriorityScheme scheme, int current, int step, int fixed,
                 CounterRng* rng);

// Static core split: {0..ls-1} for latency-sensitive apps and the rest for
// latency-desired ones.  Both sides need at least one core and must cover
// the machine exactly.
struct PartitionSpec {
  uint64_t ls_mask = 0;
  uint64_t ld_mask = 0;
};
PartitionSpec PartitionCores(int ls_cores, int ld_cores, int num_cores);

// Leaves every app in the fair-share class on the full mask: the stock
// platform behavior.
class LassController : public Controller {};

// Applies one priority scheme to every latency-sensitive app each window.
class SchemeController : public Controller {
 public:
  SchemeController(PriorityScheme scheme, int step, int fixed, uint64_t seed);
  void OnWindow(const WindowSnapshot& snap, HostControl& host) override;

 private:
  PriorityScheme scheme_;
  int step_;
  int fixed_;
  CounterRng rng_;
};

// Pins apps to the static partition at start; affinity masks may overlap
// arbitrarily and no dedication bookkeeping takes place.
class PartitionController : public Controller {
 public:
  explicit PartitionController(const PartitionSpec& spec) : spec_(spec) {}
  void OnStart(HostControl& host) override;

 private:
  PartitionSpec spec_;
};

}  // namespace faasim

#endif  // FAASIM_BASELINES_H_
