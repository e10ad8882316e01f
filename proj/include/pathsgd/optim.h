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

#ifndef PATHSGD_OPTIM_H_
#define PATHSGD_OPTIM_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/graph.h"
#include "pathsgd/model.h"
#include "pathsgd/pathnorm.h"
#include "pathsgd/tasks.h"

namespace pathsgd {

enum class OptimizerKind { kSgd, kPathSgd, kAdam, kPathAdam };

OptimizerKind ParseOptimizerKind(const std::string& name);
const char* OptimizerKindName(OptimizerKind kind);
inline bool UsesKappa(OptimizerKind k) {
  return k == OptimizerKind::kPathSgd || k == OptimizerKind::kPathAdam;
}
inline bool UsesAdam(OptimizerKind k) {
  return k == OptimizerKind::kAdam || k == OptimizerKind::kPathAdam;
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kPathSgd;
  double lr = 1e-3;
  KappaMode kappa_mode = KappaMode::kFirstTerm;
  double kappa_floor = 1e-8;
  int kappa_every = 1;  // refresh period of the cached preconditioner
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  // Throws std::invalid_argument.
  void Validate() const;
};

struct OptimizerState {
  OptimizerConfig config;
  long step = 0;           // updates applied so far
  Eigen::VectorXd m, v;    // Adam moments (empty for SGD kinds)
  long adam_t = 0;
  Eigen::VectorXd kappa;   // selected-mode preconditioner, unfloored
  long kappa_step = -1;    // step at which kappa was computed

  static OptimizerState Init(const OptimizerConfig& config, int num_params);
};

// p - lr * g.
ParamVector SgdStep(const ParamVector& p, const Eigen::VectorXd& g, double lr);

// g_i / max(kappa_i, floor).
Eigen::VectorXd Precondition(const Eigen::VectorXd& g, const Eigen::VectorXd& kappa,
                             double floor);

// p_i - lr / max(kappa_i, floor) * g_i. With kappa == 1 this equals SgdStep
// bit for bit.
ParamVector PathSgdStep(const ParamVector& p, const Eigen::VectorXd& g,
                        const Eigen::VectorXd& kappa, double lr, double floor = 1e-8);

// Same, with kappa computed on the net at the pre-update p.
ParamVector PathSgdStep(const SharedWeightNet& net, const ParamVector& p,
                        const Eigen::VectorXd& g, double lr, KappaMode mode,
                        double floor = 1e-8);

// Bias-corrected Adam on the direction u; advances state->m, v, adam_t.
ParamVector AdamStep(const ParamVector& p, const Eigen::VectorXd& u, OptimizerState* state);

// Adam fed with the preconditioned gradient.
ParamVector PathAdamStep(const ParamVector& p, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& kappa, OptimizerState* state);

// One update of any kind. Path kinds refresh state->kappa from the model at
// the pre-update p whenever it is older than kappa_every steps.
ParamVector OptimizerStep(const Model& model, const ParamVector& p, const Eigen::VectorXd& g,
                          OptimizerState* state);

// ---------------------------------------------------------------------------
// Initialization.

enum class InitScheme { kUniform, kIdentity };
InitScheme ParseInitScheme(const std::string& name);
const char* InitSchemeName(InitScheme scheme);

struct InitConfig {
  InitScheme scheme = InitScheme::kUniform;
  double range = 0.1;          // default half-width for every matrix
  double rec_range = -1.0;     // W_rec half-width; < 0 means "use range"
  double nonrec_range = -1.0;  // W_in / W_out half-width; < 0 means "use range"
};

// Uniform: W_rec ~ U[-rec, rec], other matrices ~ U[-nonrec, nonrec].
// Identity: W_rec = I, other matrices ~ U[-nonrec, nonrec] with nonrec
// defaulting to 0.01. Biases start at zero in both schemes.
ParamVector InitRnnParams(const RnnSpec& spec, const InitConfig& init, std::mt19937_64& rng);
ParamVector InitUniform(int num_params, double range, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Training loop.

// Independent stream for (seed, consumer, index); consumers are small ids
// such as kStreamInit.
std::mt19937_64 DeriveRng(std::uint64_t seed, std::uint64_t consumer, std::uint64_t index = 0);
inline constexpr std::uint64_t kStreamInit = 1;
inline constexpr std::uint64_t kStreamData = 2;
inline constexpr std::uint64_t kStreamBatch = 3;
inline constexpr std::uint64_t kStreamRescale = 4;

struct TrainConfig {
  OptimizerConfig optimizer;
  int batch_size = 32;
  long steps = 1000;
  long eval_interval = 100;
  long checkpoint_interval = 0;  // 0 disables
  std::uint64_t seed = 1;
  double target_metric = std::numeric_limits<double>::quiet_NaN();  // NaN disables
  double divergence_threshold = 1e6;
  int train_eval_size = 256;
  bool log_kappa_ratio = false;
  bool wall_clock = false;
};

struct MetricsRow {
  long step = 0;
  double train_loss = 0.0;
  double train_metric = 0.0;
  double test_metric = 0.0;
  std::optional<double> kappa_ratio;
  double wall_ms = 0.0;
};

enum class TrainStatus { kConverged, kBudgetExhausted, kDiverged };
const char* TrainStatusName(TrainStatus status);

struct TrainResult {
  TrainStatus status = TrainStatus::kBudgetExhausted;
  ParamVector params;    // last finite parameters
  OptimizerState state;  // matching optimizer state
  std::vector<MetricsRow> history;
  double final_test_metric = std::numeric_limits<double>::quiet_NaN();
};

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_metrics;
  std::function<void(const ParamVector&, const OptimizerState&)> on_checkpoint;
};

// Mean loss and metric of p over data.examples[first, first + count),
// evaluated in chunks.
struct EvalResult {
  double loss = 0.0;
  double metric = 0.0;
};
EvalResult Evaluate(const Model& model, const ParamVector& p, const Dataset& data,
                    MetricKind metric, size_t first, size_t count);

// Runs from state.step up to config.steps. Metrics are recorded at step 0
// (fresh runs only), every eval_interval steps and at the final step. The
// minibatch of step s depends only on (seed, s), so resuming from a
// checkpoint reproduces the uninterrupted run.
TrainResult TrainLoop(const Model& model, const TaskData& task, const TrainConfig& config,
                      ParamVector p, OptimizerState state, const TrainHooks& hooks = {});

}  // namespace pathsgd

#endif  // PATHSGD_OPTIM_H_
