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

#ifndef FAASIM_WORKLOAD_H_
#define FAASIM_WORKLOAD_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "faasim/rng.h"

namespace faasim {

// LS functions care about tail latency; LD functions only need eventual
// throughput.  The distinction drives which apps the controller manages.
enum class LatencyClass { kSensitive, kDesired };

struct FunctionSpec {
  std::string id;
  LatencyClass category = LatencyClass::kSensitive;
  double mean_service_time = 0;  // seconds of CPU demand per request
  double arrival_rate = 0;       // requests per second (Poisson)
  bool uses_futex_lock = false;
  double isolated_ipc = 1.0;
  // Mean per-window (cpu_wait_time, nvcs, itlb_misses) measured solo;
  // filled in by calibration, zero until then.
  std::array<double, 3> isolated_contention_baseline{0, 0, 0};
  double code_footprint = 0;  // abstract pages; sets iTLB refill cost
};

// One open-loop Poisson arrival source feeding one application.
struct RequestStream {
  std::string app;
  double arrival_rate = 0;
  double mean_service_time = 0;
  uint64_t seed = 1;
  uint64_t stream = 0;
};

struct Arrival {
  double time;    // absolute arrival instant
  double demand;  // exponential service demand, seconds
};

// Offered load rho = lambda * mu / c.  All arguments must be positive.
double QueueUtilization(double lambda, double mu, int servers);

// Smallest server count keeping rho at or below rho_target (never 0).
// rho_target must lie in (0, 1].
int RequiredServers(double lambda, double mu, double rho_target);

// Incremental arrival generator.  Draw order per request is fixed
// (inter-arrival gap, then demand) so batch and incremental use agree.
class ArrivalSequence {
 public:
  ArrivalSequence(double lambda, double mean_service, uint64_t seed,
                  uint64_t stream);
  Arrival Next();

 private:
  double lambda_;
  double service_rate_;
  double clock_ = 0;
  CounterRng rng_;
};

// All arrivals in [0, horizon).  A non-positive horizon yields an empty
// trace.  lambda and mean_service must be positive.
std::vector<Arrival> GenerateTrace(double lambda, double mean_service,
                                   uint64_t seed, uint64_t stream,
                                   double horizon);

// Ten-function benchmark catalog.  Every entry keeps lambda * mu inside
// [0.85, 0.95] so a single server runs hot but stable.
const std::vector<FunctionSpec>& BuiltinCatalog();

// Lookup by id; throws std::invalid_argument when absent.
const FunctionSpec& CatalogEntry(const std::vector<FunctionSpec>& catalog,
                                 const std::string& id);

// Text round-trip: one "id category mu lambda lock footprint" record per
// line, '#' comments allowed.  Loader validates positivity.
std::vector<FunctionSpec> LoadCatalog(const std::string& path);
void SaveCatalog(const std::vector<FunctionSpec>& catalog,
                 const std::string& path);

// Streams for a set of specs: per-app substream of master_seed.
std::vector<RequestStream> MakeStreams(
    const std::vector<FunctionSpec>& specs, uint64_t master_seed);

}  // namespace faasim

#endif  // FAASIM_WORKLOAD_H_
