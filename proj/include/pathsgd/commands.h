// Copyright 2026 The pathsgd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Subcommand bodies. Each returns a process exit code.

#ifndef PATHSGD_COMMANDS_H_
#define PATHSGD_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pathsgd/config.h"
#include "pathsgd/optim.h"
#include "pathsgd/verify.h"

namespace pathsgd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerifyFailed = 2;
inline constexpr int kExitDiverged = 3;

inline constexpr const char* kOutputDirEnv = "PATHSGD_OUTPUT_DIR";

// Metrics CSV: step,train_loss,train_metric,test_metric[,kappa_ratio],wall_ms.
std::string MetricsHeader(bool with_kappa_ratio);
std::string MetricsLine(const MetricsRow& row, bool with_kappa_ratio);

struct TrainOutcome {
  TrainResult result;
  std::string out_dir;
  int exit_code = kExitOk;
};

// Writes <out_dir>/metrics.csv, <out_dir>/checkpoint.txt and
// <out_dir>/config.txt. With config.resume set, the CSV is cut back to the
// checkpoint's step and continued, so it matches an uninterrupted run.
TrainOutcome RunTraining(const RunConfig& config, std::ostream& log);
int CmdTrain(const RunConfig& config, std::ostream& log);

int CmdVerify(VerifyLevel level, std::uint64_t seed, double kappa_fault_scale, std::ostream& out);

struct KappaRatioOptions {
  std::vector<int> hidden = {20, 100};
  std::vector<int> lengths = {10, 20};
  int seeds = 5;
  std::uint64_t first_seed = 1;
  double init_range = 0.1;
  int input_dim = 10000;
  int output_dim = 10000;
  bool crosscheck = false;    // compare the matrix form with path enumeration
  double max_params = 5e7;    // resource guard
};

struct KappaRatioCell {
  int hidden = 0;
  int length = 0;
  std::vector<double> ratios;
  double mean = 0.0;
  double sd = 0.0;            // sample standard deviation
  double crosscheck_rel = -1.0;  // -1 when not requested
};

// Throws std::length_error when a cell exceeds the guard.
std::vector<KappaRatioCell> KappaRatioStudy(const KappaRatioOptions& options);
void WriteKappaRatioCsv(const std::vector<KappaRatioCell>& cells, bool crosscheck, std::ostream& out);
int CmdKappaRatio(const KappaRatioOptions& options, std::ostream& out);

struct GenDataOptions {
  TaskKind task = TaskKind::kAddition;
  int length = 100;
  int count = 1000;
  std::uint64_t seed = 1;
  std::string corpus;  // char-LM only; defaults to the bundled text
  double slope = 2.0;
  std::string out_path;
};
Dataset GenerateDataset(const GenDataOptions& options);
int CmdGenData(const GenDataOptions& options, std::ostream& log);

}  // namespace pathsgd

#endif  // PATHSGD_COMMANDS_H_
