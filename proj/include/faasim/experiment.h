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

#ifndef FAASIM_EXPERIMENT_H_
#define FAASIM_EXPERIMENT_H_

#include <array>
#include <string>
#include <vector>

#include "faasim/agent.h"
#include "faasim/config.h"
#include "faasim/host.h"
#include "faasim/workload.h"

namespace faasim {

// Isolated per-app statistics: the denominator for every "normalized to
// solo execution" column and the scaling ranges for agent features.
struct AppCalibration {
  std::string id;
  double exec_mean = 0, exec_var = 0, exec_iqr = 0;
  double resp_mean = 0, resp_var = 0, resp_iqr = 0;
  std::array<double, 3> cont_mean{0, 0, 0};  // per-window wait/nvcs/misses
  double slowdown_mean = 1.0;
  int64_t completions = 0;
};

struct Calibration {
  std::vector<AppCalibration> apps;
  FeatureBounds bounds;
  const AppCalibration* Find(const std::string& id) const;
};

// Runs every app solo (no host daemons) for the isolated baselines, then
// all apps together under the stock scheduler to size the feature ranges.
Calibration Calibrate(const ExperimentConfig& cfg,
                      const std::vector<FunctionSpec>& specs);

// Copies the measured solo contention means onto the specs.
void ApplyBaselines(std::vector<FunctionSpec>* specs, const Calibration& cal);

// Text round trip, exact through shortest-digits formatting.
void SaveCalibration(const Calibration& cal, const std::string& path);
Calibration LoadCalibration(const std::string& path);

// Catalog selection honoring cfg.apps and cfg.catalog_path.
std::vector<FunctionSpec> SelectSpecs(const ExperimentConfig& cfg);

struct RunOutputs {
  SimResult result;
  std::vector<DecisionRecord> decisions;  // faasched runs only
  int64_t agent_updates = 0;
  int64_t agent_skipped = 0;
};

// One simulation under cfg.controller: "lass", "rid", "fp", "si", "sd",
// "partition", or "faasched" (which needs ckpt and runs greedily).
RunOutputs RunWithController(const ExperimentConfig& cfg,
                             std::vector<FunctionSpec> specs,
                             const Checkpoint* ckpt);

// Calibrates, trains over cfg.host.horizon, writes the checkpoint.
struct TrainOutputs {
  RunOutputs run;
  Calibration calibration;
};
TrainOutputs TrainAgent(const ExperimentConfig& cfg,
                        std::vector<FunctionSpec> specs,
                        const std::string& checkpoint_path);

// Output files.  Byte-stable across identical runs; only the metadata
// timestamp line varies.
void WriteRequestsCsv(const SimResult& res,
                      const std::vector<FunctionSpec>& specs,
                      const std::string& path);
void WriteWindowsCsv(const SimResult& res, const std::string& path);
void WriteDecisionsCsv(const std::vector<DecisionRecord>& decisions,
                       const std::vector<FunctionSpec>& specs,
                       const std::string& path);
void WriteSummaryCsv(const SimResult& res,
                     const std::vector<FunctionSpec>& specs,
                     const Calibration* cal, const std::string& path);
void WriteMetadata(const ExperimentConfig& cfg,
                   const std::vector<FunctionSpec>& specs,
                   const RunOutputs& out, const std::string& path);

// Shortest round-trip decimal form, locale-independent.
std::string FormatDouble(double v);

// Reads windows.csv and summary.csv from a finished run directory and
// renders latency statistics plus contention correlations.
std::string BuildReport(const std::string& dir);

}  // namespace faasim

#endif  // FAASIM_EXPERIMENT_H_
