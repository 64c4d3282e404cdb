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

// faasim: deterministic multi-tenant serverless host simulator.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 simulation
// failure, 4 output write failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "faasim/experiment.h"

namespace {

using namespace faasim;

struct CommonFlags {
  std::string config_path;
  int64_t seed = -1;
};

void AddCommon(CLI::App* sub, CommonFlags* flags) {
  sub->add_option("--config", flags->config_path,
                  "experiment config file (defaults apply when omitted)");
  sub->add_option("--seed", flags->seed,
                  "master seed overriding workload, host, and agent seeds");
}

ExperimentConfig LoadConfig(const CommonFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = LoadConfigFile(flags.config_path);
  if (flags.seed >= 0) {
    cfg.workload_seed = static_cast<uint64_t>(flags.seed);
    cfg.host.seed = static_cast<uint64_t>(flags.seed);
    cfg.agent.seed = static_cast<uint64_t>(flags.seed);
  }
  return cfg;
}

void WriteRunDir(const ExperimentConfig& cfg,
                 const std::vector<FunctionSpec>& specs, const RunOutputs& out,
                 const Calibration* cal, const std::string& dir) {
  std::filesystem::create_directories(dir);
  WriteRequestsCsv(out.result, specs, dir + "/requests.csv");
  WriteWindowsCsv(out.result, dir + "/windows.csv");
  WriteSummaryCsv(out.result, specs, cal, dir + "/summary.csv");
  WriteMetadata(cfg, specs, out, dir + "/metadata.txt");
  if (!out.decisions.empty())
    WriteDecisionsCsv(out.decisions, specs, dir + "/decisions.csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "faasim: deterministic multi-tenant serverless host simulator"};
  app.require_subcommand(1);

  CommonFlags cal_flags;
  std::string cal_out = "calibration.txt";
  CLI::App* cmd_cal =
      app.add_subcommand("calibrate", "measure isolated per-app baselines");
  AddCommon(cmd_cal, &cal_flags);
  cmd_cal->add_option("--out", cal_out, "calibration file to write");

  CommonFlags run_flags;
  std::string run_out = "out", run_controller, run_ckpt, run_cal;
  CLI::App* cmd_run =
      app.add_subcommand("run", "simulate one scheduler configuration");
  AddCommon(cmd_run, &run_flags);
  cmd_run->add_option("--out", run_out, "output directory");
  cmd_run->add_option("--controller", run_controller,
                      "lass | rid | fp | si | sd | partition | faasched");
  cmd_run->add_option("--checkpoint", run_ckpt,
                      "trained agent checkpoint (faasched)");
  cmd_run->add_option("--calibration", run_cal,
                      "calibration file for normalized summary columns");

  CommonFlags train_flags;
  std::string train_ckpt = "agent.ckpt", train_out;
  CLI::App* cmd_train =
      app.add_subcommand("train", "calibrate, then train the agent");
  AddCommon(cmd_train, &train_flags);
  cmd_train->add_option("--checkpoint", train_ckpt, "checkpoint to write");
  cmd_train->add_option("--out", train_out,
                        "also dump the training run and calibration here");

  CommonFlags eval_flags;
  std::string eval_out = "out", eval_ckpt, eval_cal;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "run the trained agent greedily");
  AddCommon(cmd_eval, &eval_flags);
  cmd_eval->add_option("--out", eval_out, "output directory");
  cmd_eval->add_option("--checkpoint", eval_ckpt, "trained agent checkpoint")
      ->required();
  cmd_eval->add_option("--calibration", eval_cal,
                       "calibration file for normalized summary columns");

  std::string report_dir = "out";
  CLI::App* cmd_report =
      app.add_subcommand("report", "summarize a finished run directory");
  cmd_report->add_option("dir", report_dir, "run directory to read");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  // Stage tracks the exit code for faults in the current phase: 2 while
  // loading inputs, 3 while simulating, 4 while writing outputs.
  int stage = 2;
  try {
    if (cmd_cal->parsed()) {
      ExperimentConfig cfg = LoadConfig(cal_flags);
      std::vector<FunctionSpec> specs = SelectSpecs(cfg);
      stage = 3;
      Calibration cal = Calibrate(cfg, specs);
      stage = 4;
      SaveCalibration(cal, cal_out);
      std::cout << "calibrated " << cal.apps.size() << " apps -> " << cal_out
                << '\n';
    } else if (cmd_run->parsed() || cmd_eval->parsed()) {
      bool is_eval = cmd_eval->parsed();
      const CommonFlags& flags = is_eval ? eval_flags : run_flags;
      ExperimentConfig cfg = LoadConfig(flags);
      if (is_eval) cfg.controller = "faasched";
      if (!run_controller.empty()) cfg.controller = run_controller;
      std::vector<FunctionSpec> specs = SelectSpecs(cfg);
      std::optional<Checkpoint> ckpt;
      std::string ckpt_path = is_eval ? eval_ckpt : run_ckpt;
      if (cfg.controller == "faasched") {
        if (ckpt_path.empty())
          throw std::invalid_argument("faasched needs --checkpoint");
        ckpt = LoadCheckpoint(ckpt_path);
      }
      std::optional<Calibration> cal;
      std::string cal_path = is_eval ? eval_cal : run_cal;
      if (!cal_path.empty()) {
        cal = LoadCalibration(cal_path);
        ApplyBaselines(&specs, *cal);
      }
      stage = 3;
      RunOutputs out =
          RunWithController(cfg, specs, ckpt ? &*ckpt : nullptr);
      stage = 4;
      const std::string& dir = is_eval ? eval_out : run_out;
      WriteRunDir(cfg, specs, out, cal ? &*cal : nullptr, dir);
      std::cout << cfg.controller << ": requests="
                << out.result.records.size()
                << " windows=" << out.result.windows.size()
                << " rejections=" << out.result.totals.enforcement_rejections
                << " -> " << dir << '\n';
    } else if (cmd_train->parsed()) {
      ExperimentConfig cfg = LoadConfig(train_flags);
      cfg.controller = "faasched";
      std::vector<FunctionSpec> specs = SelectSpecs(cfg);
      stage = 3;
      TrainOutputs out = TrainAgent(cfg, specs, train_ckpt);
      stage = 4;
      if (!train_out.empty()) {
        ApplyBaselines(&specs, out.calibration);
        WriteRunDir(cfg, specs, out.run, &out.calibration, train_out);
        SaveCalibration(out.calibration, train_out + "/calibration.txt");
      }
      std::cout << "trained: decisions=" << out.run.decisions.size()
                << " updates=" << out.run.agent_updates
                << " skipped=" << out.run.agent_skipped << " -> " << train_ckpt
                << '\n';
    } else if (cmd_report->parsed()) {
      stage = 3;
      std::string text = BuildReport(report_dir);
      stage = 4;
      std::cout << text;
    }
  } catch (const std::invalid_argument& e) {
    // Invalid-argument faults always trace back to configuration.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stage;
  }
  return 0;
}
