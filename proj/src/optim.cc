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

#include "pathsgd/optim.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pathsgd/rnn_engine.h"

namespace pathsgd {

OptimizerKind ParseOptimizerKind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "path_sgd") return OptimizerKind::kPathSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "path_adam") return OptimizerKind::kPathAdam;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

const char* OptimizerKindName(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kPathSgd: return "path_sgd";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kPathAdam: return "path_adam";
  }
  return "?";
}

void OptimizerConfig::Validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be positive");
  if (!(kappa_floor > 0.0)) throw std::invalid_argument("kappa_floor must be positive");
  if (kappa_every < 1) throw std::invalid_argument("kappa_every must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be positive");
}

OptimizerState OptimizerState::Init(const OptimizerConfig& config, int num_params) {
  config.Validate();
  OptimizerState s;
  s.config = config;
  if (UsesAdam(config.kind)) {
    s.m = Eigen::VectorXd::Zero(num_params);
    s.v = Eigen::VectorXd::Zero(num_params);
  }
  return s;
}

ParamVector SgdStep(const ParamVector& p, const Eigen::VectorXd& g, double lr) {
  if (p.size() != g.size()) throw std::invalid_argument("SgdStep: size mismatch");
  CheckFinite(g, "gradient");
  ParamVector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = p[i] - lr * g[i];
  return out;
}

Eigen::VectorXd Precondition(const Eigen::VectorXd& g, const Eigen::VectorXd& kappa,
                             double floor) {
  if (g.size() != kappa.size()) throw std::invalid_argument("Precondition: size mismatch");
  CheckFinite(g, "gradient");
  CheckFinite(kappa, "kappa");
  Eigen::VectorXd out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = g[i] / std::max(kappa[i], floor);
  return out;
}

ParamVector PathSgdStep(const ParamVector& p, const Eigen::VectorXd& g,
                        const Eigen::VectorXd& kappa, double lr, double floor) {
  if (p.size() != g.size() || p.size() != kappa.size()) {
    throw std::invalid_argument("PathSgdStep: size mismatch");
  }
  CheckFinite(g, "gradient");
  CheckFinite(kappa, "kappa");
  ParamVector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out[i] = p[i] - (lr / std::max(kappa[i], floor)) * g[i];
  }
  return out;
}

ParamVector PathSgdStep(const SharedWeightNet& net, const ParamVector& p,
                        const Eigen::VectorXd& g, double lr, KappaMode mode, double floor) {
  const Eigen::VectorXd kappa =
      mode == KappaMode::kFirstTerm ? Kappa1(net, p) : ComputeKappa(net, p).total();
  return PathSgdStep(p, g, kappa, lr, floor);
}

ParamVector AdamStep(const ParamVector& p, const Eigen::VectorXd& u, OptimizerState* state) {
  const OptimizerConfig& c = state->config;
  if (state->m.size() != p.size()) {
    state->m = Eigen::VectorXd::Zero(p.size());
    state->v = Eigen::VectorXd::Zero(p.size());
  }
  if (u.size() != p.size()) throw std::invalid_argument("AdamStep: size mismatch");
  CheckFinite(u, "Adam input");
  ++state->adam_t;
  const double t = static_cast<double>(state->adam_t);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  ParamVector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    state->m[i] = c.beta1 * state->m[i] + (1.0 - c.beta1) * u[i];
    state->v[i] = c.beta2 * state->v[i] + (1.0 - c.beta2) * u[i] * u[i];
    const double m_hat = state->m[i] / corr1;
    const double v_hat = state->v[i] / corr2;
    out[i] = p[i] - c.lr * m_hat / (std::sqrt(v_hat) + c.adam_eps);
  }
  return out;
}

ParamVector PathAdamStep(const ParamVector& p, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& kappa, OptimizerState* state) {
  return AdamStep(p, Precondition(g, kappa, state->config.kappa_floor), state);
}

ParamVector OptimizerStep(const Model& model, const ParamVector& p, const Eigen::VectorXd& g,
                          OptimizerState* state) {
  const OptimizerConfig& c = state->config;
  if (UsesKappa(c.kind) &&
      (state->kappa_step < 0 || state->kappa.size() != p.size() ||
       state->step - state->kappa_step >= c.kappa_every)) {
    state->kappa = model.Kappa(p, c.kappa_mode).select(c.kappa_mode);
    state->kappa_step = state->step;
  }
  ParamVector out;
  switch (c.kind) {
    case OptimizerKind::kSgd: out = SgdStep(p, g, c.lr); break;
    case OptimizerKind::kPathSgd:
      out = PathSgdStep(p, g, state->kappa, c.lr, c.kappa_floor);
      break;
    case OptimizerKind::kAdam: out = AdamStep(p, g, state); break;
    case OptimizerKind::kPathAdam: out = PathAdamStep(p, g, state->kappa, state); break;
  }
  ++state->step;
  return out;
}

InitScheme ParseInitScheme(const std::string& name) {
  if (name == "uniform") return InitScheme::kUniform;
  if (name == "identity") return InitScheme::kIdentity;
  throw std::invalid_argument("unknown init scheme '" + name + "'");
}

const char* InitSchemeName(InitScheme scheme) {
  return scheme == InitScheme::kUniform ? "uniform" : "identity";
}

namespace {

void FillUniform(Eigen::Map<RowMatrix> block, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-range, range);
  for (Eigen::Index j = 0; j < block.rows(); ++j) {
    for (Eigen::Index k = 0; k < block.cols(); ++k) block(j, k) = u(rng);
  }
}

}  // namespace

ParamVector InitRnnParams(const RnnSpec& spec, const InitConfig& init, std::mt19937_64& rng) {
  const RnnLayout layout = MakeRnnLayout(spec);
  const bool identity = init.scheme == InitScheme::kIdentity;
  const double nonrec =
      init.nonrec_range >= 0.0 ? init.nonrec_range : (identity ? 0.01 : init.range);
  const double rec = init.rec_range >= 0.0 ? init.rec_range : init.range;
  if (!(nonrec >= 0.0) || !(rec >= 0.0)) throw std::invalid_argument("init ranges must be >= 0");
  ParamVector p = ParamVector::Zero(layout.num_params);
  for (size_t i = 0; i < spec.hidden_dims.size(); ++i) {
    FillUniform(BlockView(p, layout.w_in[i]), nonrec, rng);
    if (layout.has_recurrent()) {
      auto w_rec = BlockView(p, layout.w_rec[i]);
      if (identity) {
        w_rec.setIdentity();
      } else {
        FillUniform(w_rec, rec, rng);
      }
    }
  }
  FillUniform(BlockView(p, layout.w_out), nonrec, rng);
  return p;
}

ParamVector InitUniform(int num_params, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-range, range);
  ParamVector p(num_params);
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = u(rng);
  return p;
}

std::mt19937_64 DeriveRng(std::uint64_t seed, std::uint64_t consumer, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(consumer),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

const char* TrainStatusName(TrainStatus status) {
  switch (status) {
    case TrainStatus::kConverged: return "converged";
    case TrainStatus::kBudgetExhausted: return "budget_exhausted";
    case TrainStatus::kDiverged: return "diverged";
  }
  return "?";
}

EvalResult Evaluate(const Model& model, const ParamVector& p, const Dataset& data,
                    MetricKind metric, size_t first, size_t count) {
  if (count == 0 || first + count > data.size()) {
    throw std::invalid_argument("Evaluate: empty or out-of-range example window");
  }
  constexpr size_t kChunk = 256;
  EvalResult r;
  std::vector<const SequenceExample*> ptrs;
  for (size_t start = first; start < first + count; start += kChunk) {
    const size_t n = std::min(kChunk, first + count - start);
    ptrs.clear();
    for (size_t k = 0; k < n; ++k) ptrs.push_back(&data.examples[start + k]);
    const double w = static_cast<double>(n) / static_cast<double>(count);
    r.loss += w * model.Loss(p, ptrs);
    r.metric += w * ComputeMetric(metric, model.Readouts(p, ptrs), data, start, n);
  }
  return r;
}

TrainResult TrainLoop(const Model& model, const TaskData& task, const TrainConfig& config,
                      ParamVector p, OptimizerState state, const TrainHooks& hooks) {
  config.optimizer.Validate();
  if (!(task.train.format == model.format()) || !(task.test.format == model.format())) {
    throw std::invalid_argument("TrainLoop: task format does not match the model");
  }
  if (task.train.size() == 0 || task.test.size() == 0) {
    throw std::invalid_argument("TrainLoop: empty train or test split");
  }
  if (p.size() != model.num_params()) throw std::invalid_argument("TrainLoop: wrong p size");
  if (config.batch_size < 1 || config.steps < 0 || config.eval_interval < 1) {
    throw std::invalid_argument("TrainLoop: batch_size, steps and eval_interval must be positive");
  }
  CheckFinite(p, "initial parameters");

  const auto start = std::chrono::steady_clock::now();
  const size_t train_eval =
      std::min(task.train.size(), static_cast<size_t>(std::max(config.train_eval_size, 1)));
  TrainResult result;

  auto record = [&](long step) {
    MetricsRow row;
    row.step = step;
    const EvalResult tr = Evaluate(model, p, task.train, task.metric, 0, train_eval);
    row.train_loss = tr.loss;
    row.train_metric = tr.metric;
    row.test_metric = Evaluate(model, p, task.test, task.metric, 0, task.test.size()).metric;
    if (config.log_kappa_ratio) row.kappa_ratio = KappaRatio(model.Kappa(p, KappaMode::kBothTerms));
    if (config.wall_clock) {
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start).count();
    }
    return row;
  };
  auto emit = [&](const MetricsRow& row) {
    result.history.push_back(row);
    result.final_test_metric = row.test_metric;
    if (hooks.on_metrics) hooks.on_metrics(row);
  };
  auto converged = [&](const MetricsRow& row) {
    return !std::isnan(config.target_metric) && std::isfinite(row.test_metric) &&
           row.test_metric <= config.target_metric;
  };

  result.status = TrainStatus::kBudgetExhausted;
  if (state.step == 0) {
    const MetricsRow row = record(0);
    emit(row);
    if (converged(row)) result.status = TrainStatus::kConverged;
  }

  std::vector<const SequenceExample*> batch(config.batch_size);
  while (result.status == TrainStatus::kBudgetExhausted && state.step < config.steps) {
    std::mt19937_64 rng = DeriveRng(config.seed, kStreamBatch, static_cast<std::uint64_t>(state.step));
    std::uniform_int_distribution<size_t> pick(0, task.train.size() - 1);
    for (auto& ex : batch) ex = &task.train.examples[pick(rng)];

    const LossGrad lg = model.LossAndGrad(p, batch);
    if (!std::isfinite(lg.loss) || lg.loss > config.divergence_threshold || !lg.grad.allFinite()) {
      result.status = TrainStatus::kDiverged;
      break;
    }
    OptimizerState next_state = state;
    ParamVector next = OptimizerStep(model, p, lg.grad, &next_state);
    if (!next.allFinite()) {
      result.status = TrainStatus::kDiverged;
      break;
    }
    p = std::move(next);
    state = std::move(next_state);

    if (state.step % config.eval_interval == 0 || state.step == config.steps) {
      const MetricsRow row = record(state.step);
      if (!std::isfinite(row.train_loss) || row.train_loss > config.divergence_threshold ||
          !std::isfinite(row.test_metric)) {
        result.status = TrainStatus::kDiverged;
        break;
      }
      emit(row);
      if (converged(row)) result.status = TrainStatus::kConverged;
    }
    // After the metrics row, so a checkpoint at step s implies row s exists.
    if (config.checkpoint_interval > 0 && state.step % config.checkpoint_interval == 0 &&
        hooks.on_checkpoint) {
      hooks.on_checkpoint(p, state);
    }
  }
  result.params = std::move(p);
  result.state = std::move(state);
  return result;
}

}  // namespace pathsgd
