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

// Run configuration: a flat "key = value" file, '#' starts a comment.
// Later assignments (including command-line overrides) win.

#ifndef PATHSGD_CONFIG_H_
#define PATHSGD_CONFIG_H_

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathsgd/compute.h"
#include "pathsgd/graph.h"
#include "pathsgd/model.h"
#include "pathsgd/optim.h"
#include "pathsgd/tasks.h"

namespace pathsgd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

ConfigMap ParseConfig(std::istream& in, const std::string& origin = "<config>");
ConfigMap ParseConfigFile(const std::string& path);
// "key=value"; throws ConfigError when '=' is missing.
void ApplyOverride(ConfigMap* config, const std::string& assignment);

enum class TaskKind { kAddition, kSeqClass, kCharLm, kLinreg };
TaskKind ParseTaskKind(const std::string& name);
const char* TaskKindName(TaskKind kind);

struct RunConfig {
  TaskKind task = TaskKind::kAddition;
  int length = 40;          // addition sequence length / char-LM unroll
  int train_size = 10000;
  int test_size = 1000;
  std::string corpus;       // char-LM text file
  std::string images;       // optional image-set file for seqclass
  double image_noise = 0.1;
  double linreg_slope = 2.0;
  double train_fraction = 0.8;
  double valid_fraction = 0.1;

  std::vector<int> hidden = {32};
  bool bias = false;
  Activation activation = Activation::kRelu;
  InitConfig init;

  TrainConfig train;
  std::string out_dir = "runs/default";
  std::string resume;       // checkpoint path, empty for a fresh run
};

// Unknown keys and malformed values throw ConfigError.
RunConfig RunConfigFromMap(const ConfigMap& config);
// Inverse of RunConfigFromMap for every key it understands.
ConfigMap RunConfigToMap(const RunConfig& config);

// Default bundled corpus path (set at build time).
std::string DefaultCorpusPath();

TaskData BuildTask(const RunConfig& config);
// Single-edge net for linreg, otherwise an RNN over the task's format.
std::unique_ptr<Model> BuildModel(const RunConfig& config, const TaskData& task);
RnnSpec RunRnnSpec(const RunConfig& config, const SequenceFormat& format);
ParamVector InitialParams(const RunConfig& config, const Model& model);

}  // namespace pathsgd

#endif  // PATHSGD_CONFIG_H_
