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

#include "pathsgd/commands.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pathsgd/checkpoint.h"
#include "pathsgd/pathnorm.h"

namespace pathsgd {

namespace fs = std::filesystem;

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string MetricsHeader(bool with_kappa_ratio) {
  return with_kappa_ratio ? "step,train_loss,train_metric,test_metric,kappa_ratio,wall_ms"
                          : "step,train_loss,train_metric,test_metric,wall_ms";
}

std::string MetricsLine(const MetricsRow& row, bool with_kappa_ratio) {
  std::string line = std::to_string(row.step) + ',' + Num(row.train_loss) + ',' +
                     Num(row.train_metric) + ',' + Num(row.test_metric) + ',';
  if (with_kappa_ratio) line += (row.kappa_ratio ? Num(*row.kappa_ratio) : "") + ',';
  return line + Num(row.wall_ms);
}

namespace {

// Keeps the header and rows with step <= last_step.
void TruncateMetrics(const std::string& path, long last_step, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("resume: metrics file '" + path + "' is missing");
  std::string line;
  std::vector<std::string> kept;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error("resume: metrics file '" + path + "' has a different header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (std::stol(line.substr(0, line.find(','))) <= last_step) kept.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  out << header << '\n';
  for (const auto& l : kept) out << l << '\n';
}

}  // namespace

TrainOutcome RunTraining(const RunConfig& input, std::ostream& log) {
  RunConfig config = input;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    config.out_dir = env;
  }
  const TaskData task = BuildTask(config);
  const std::unique_ptr<Model> model = BuildModel(config, task);
  const auto* rnn = dynamic_cast<const RnnModel*>(model.get());
  const std::optional<RnnSpec> spec =
      rnn ? std::optional<RnnSpec>(rnn->engine().spec()) : std::nullopt;

  ParamVector p;
  OptimizerState state;
  if (config.resume.empty()) {
    p = InitialParams(config, *model);
    state = OptimizerState::Init(config.train.optimizer, model->num_params());
  } else {
    Checkpoint ckpt = LoadCheckpoint(config.resume);
    if (ckpt.spec != spec || ckpt.params.size() != model->num_params()) {
      throw ConfigError("resume: checkpoint does not match the configured network");
    }
    if (ckpt.state.config.kind != config.train.optimizer.kind) {
      throw ConfigError("resume: checkpoint was written by a different optimizer");
    }
    p = std::move(ckpt.params);
    state = std::move(ckpt.state);
    state.config = config.train.optimizer;
  }

  TrainOutcome outcome;
  outcome.out_dir = config.out_dir;
  fs::create_directories(config.out_dir);
  const std::string metrics_path = (fs::path(config.out_dir) / "metrics.csv").string();
  const std::string ckpt_path = (fs::path(config.out_dir) / "checkpoint.txt").string();
  const bool with_ratio = config.train.log_kappa_ratio;
  const std::string header = MetricsHeader(with_ratio);
  {
    std::ofstream snapshot(fs::path(config.out_dir) / "config.txt");
    for (const auto& [key, value] : RunConfigToMap(config)) snapshot << key << " = " << value << '\n';
  }
  if (config.resume.empty()) {
    std::ofstream(metrics_path, std::ios::trunc) << header << '\n';
  } else {
    TruncateMetrics(metrics_path, state.step, header);
  }
  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw std::runtime_error("cannot write '" + metrics_path + "'");

  TrainHooks hooks;
  hooks.on_metrics = [&](const MetricsRow& row) {
    metrics << MetricsLine(row, with_ratio) << '\n' << std::flush;
    log << "step " << row.step << "  train_loss " << row.train_loss << "  "
        << MetricName(task.metric) << " train " << row.train_metric << " test "
        << row.test_metric << '\n';
  };
  hooks.on_checkpoint = [&](const ParamVector& params, const OptimizerState& s) {
    SaveCheckpoint({spec, params, s}, ckpt_path);
  };
  outcome.result = TrainLoop(*model, task, config.train, std::move(p), std::move(state), hooks);
  SaveCheckpoint({spec, outcome.result.params, outcome.result.state}, ckpt_path);
  log << "status " << TrainStatusName(outcome.result.status) << "  steps "
      << outcome.result.state.step << "  final_test_" << MetricName(task.metric) << ' '
      << outcome.result.final_test_metric << '\n';
  outcome.exit_code =
      outcome.result.status == TrainStatus::kDiverged ? kExitDiverged : kExitOk;
  return outcome;
}

int CmdTrain(const RunConfig& config, std::ostream& log) {
  return RunTraining(config, log).exit_code;
}

int CmdVerify(VerifyLevel level, std::uint64_t seed, double kappa_fault_scale, std::ostream& out) {
  const bool ok = PrintReport(RunVerifySuite(level, seed, kappa_fault_scale), out);
  out << (ok ? "verify: all properties passed\n" : "verify: FAILED\n");
  return ok ? kExitOk : kExitVerifyFailed;
}

std::vector<KappaRatioCell> KappaRatioStudy(const KappaRatioOptions& o) {
  if (o.seeds < 1 || o.hidden.empty() || o.lengths.empty()) {
    throw std::invalid_argument("kappa-ratio: need at least one seed, width and length");
  }
  std::vector<KappaRatioCell> cells;
  for (int h : o.hidden) {
    for (int t : o.lengths) {
      RnnSpec spec;
      spec.depth = 2;
      spec.input_dim = o.input_dim;
      spec.hidden_dims = {h};
      spec.output_dim = o.output_dim;
      spec.length = t;
      spec.Validate();
      const double params = static_cast<double>(h) * (o.input_dim + h + o.output_dim);
      if (params > o.max_params) {
        throw std::length_error("kappa-ratio: H=" + std::to_string(h) + " exceeds the parameter guard");
      }
      KappaRatioCell cell;
      cell.hidden = h;
      cell.length = t;
      std::optional<SharedWeightNet> net;
      if (o.crosscheck) {
        net = BuildRnn(spec);
        cell.crosscheck_rel = 0.0;
      }
      for (int s = 0; s < o.seeds; ++s) {
        std::mt19937_64 rng = DeriveRng(o.first_seed + s, kStreamInit);
        InitConfig init;
        init.range = o.init_range;
        const ParamVector p = InitRnnParams(spec, init, rng);
        const KappaVector kappa = ComputeKappa(spec, p, KappaMode::kBothTerms);
        cell.ratios.push_back(KappaRatio(kappa));
        if (net) {
          cell.crosscheck_rel =
              std::max(cell.crosscheck_rel, RelErr(kappa.k2, Kappa2Bruteforce(*net, p)));
        }
      }
      double sum = 0.0;
      for (double r : cell.ratios) sum += r;
      cell.mean = sum / cell.ratios.size();
      double ss = 0.0;
      for (double r : cell.ratios) ss += (r - cell.mean) * (r - cell.mean);
      cell.sd = cell.ratios.size() > 1 ? std::sqrt(ss / (cell.ratios.size() - 1)) : 0.0;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void WriteKappaRatioCsv(const std::vector<KappaRatioCell>& cells, bool crosscheck,
                        std::ostream& out) {
  out << "hidden,length,seeds,mean_ratio,sd_ratio" << (crosscheck ? ",crosscheck_rel" : "") << '\n';
  for (const auto& c : cells) {
    out << c.hidden << ',' << c.length << ',' << c.ratios.size() << ',' << Num(c.mean) << ','
        << Num(c.sd);
    if (crosscheck) out << ',' << Num(c.crosscheck_rel);
    out << '\n';
  }
}

int CmdKappaRatio(const KappaRatioOptions& options, std::ostream& out) {
  WriteKappaRatioCsv(KappaRatioStudy(options), options.crosscheck, out);
  return kExitOk;
}

Dataset GenerateDataset(const GenDataOptions& o) {
  if (o.count < 1) throw std::invalid_argument("gen-data: count must be positive");
  std::mt19937_64 rng = DeriveRng(o.seed, kStreamData);
  switch (o.task) {
    case TaskKind::kAddition: return GenAddition(o.length, o.count, rng);
    case TaskKind::kLinreg: return GenLinreg(o.count, o.slope, rng);
    case TaskKind::kSeqClass: return GenSeqClass(SyntheticDigits(o.count, rng), rng);
    case TaskKind::kCharLm: {
      if (o.length < 1) throw std::invalid_argument("gen-data: length must be positive");
      const CharLmCorpus corpus =
          LoadCharCorpus(o.corpus.empty() ? DefaultCorpusPath() : o.corpus, 1.0, 0.0, o.length);
      Dataset all = CharLmDataset(corpus, corpus.train);
      if (static_cast<size_t>(o.count) < all.examples.size()) all.examples.resize(o.count);
      return all;
    }
  }
  throw std::invalid_argument("gen-data: unknown task");
}

int CmdGenData(const GenDataOptions& options, std::ostream& log) {
  const Dataset data = GenerateDataset(options);
  std::ofstream out(options.out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + options.out_path + "'");
  WriteDataset(data, out);
  if (!out) throw std::runtime_error("I/O error writing '" + options.out_path + "'");
  log << "wrote " << data.size() << " " << TaskKindName(options.task) << " records to "
      << options.out_path << '\n';
  return kExitOk;
}

}  // namespace pathsgd
