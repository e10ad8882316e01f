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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pathsgd/checkpoint.h"
#include "pathsgd/commands.h"
#include "pathsgd/config.h"
#include "pathsgd/tasks.h"

using namespace pathsgd;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per call, removed by the destructor.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("pathsgd_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(PATHSGD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig SmallAddition(const std::string& out) {
  ConfigMap m = {{"task", "addition"}, {"length", "8"},       {"hidden", "4"},
                 {"train_size", "200"}, {"test_size", "50"},  {"steps", "60"},
                 {"eval_interval", "20"}, {"optimizer", "path_adam"}, {"lr", "0.01"},
                 {"checkpoint_interval", "20"}, {"batch_size", "8"}, {"log_kappa_ratio", "true"},
                 {"out_dir", out}};
  return RunConfigFromMap(m);
}

}  // namespace

TEST_CASE("config grammar") {
  std::istringstream in(
      "# comment\n"
      "task = addition   # trailing comment\n"
      "\n"
      "  lr=0.01\n"
      "hidden = 8,4\n");
  ConfigMap m = ParseConfig(in);
  CHECK(m.at("task") == "addition");
  CHECK(m.at("lr") == "0.01");
  ApplyOverride(&m, "lr=0.5");
  CHECK(m.at("lr") == "0.5");
  CHECK_THROWS_AS(ApplyOverride(&m, "lr"), ConfigError);
  const RunConfig c = RunConfigFromMap(m);
  CHECK(c.train.optimizer.lr == 0.5);
  CHECK(c.hidden == std::vector<int>{8, 4});

  std::istringstream bad("just words\n");
  CHECK_THROWS_AS(ParseConfig(bad), ConfigError);
  CHECK_THROWS_AS(RunConfigFromMap({{"no_such_key", "1"}}), ConfigError);
  CHECK_THROWS_AS(RunConfigFromMap({{"lr", "fast"}}), ConfigError);
  CHECK_THROWS_AS(RunConfigFromMap({{"task", "vision"}}), ConfigError);
  CHECK_THROWS_AS(ParseConfigFile("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("config map round trip and task defaults") {
  const RunConfig lm = RunConfigFromMap({{"task", "charlm"}});
  CHECK(lm.length == 50);
  CHECK(lm.bias);
  CHECK(fs::exists(lm.corpus));
  const RunConfig c = SmallAddition("x");
  const RunConfig back = RunConfigFromMap(RunConfigToMap(c));
  CHECK(RunConfigToMap(back) == RunConfigToMap(c));
}

TEST_CASE("checkpoint round trip is bit exact") {
  Checkpoint ck;
  RnnSpec s;
  s.input_dim = 2;
  s.hidden_dims = {3, 2};
  s.depth = 3;
  s.length = 4;
  s.bias = true;
  ck.spec = s;
  std::mt19937_64 rng = DeriveRng(71, 0);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  ck.params.resize(MakeRnnLayout(s).num_params);
  for (auto& v : ck.params) v = u(rng) * 1e-7 + 1.0 / 3.0;
  ck.params[0] = -0.0;
  ck.params[1] = 5e-324;
  OptimizerConfig oc;
  oc.kind = OptimizerKind::kPathAdam;
  oc.lr = 1.0 / 7.0;
  oc.kappa_mode = KappaMode::kBothTerms;
  ck.state = OptimizerState::Init(oc, ck.params.size());
  ck.state.step = 17;
  ck.state.adam_t = 17;
  ck.state.kappa_step = 16;
  ck.state.m = ck.params * 0.1;
  ck.state.v = ck.params.cwiseAbs2();
  ck.state.kappa = ck.params.cwiseAbs();

  std::stringstream buf;
  WriteCheckpoint(ck, buf);
  const Checkpoint back = ReadCheckpoint(buf);
  CHECK(back.spec == ck.spec);
  CHECK((back.params.array() == ck.params.array()).all());
  CHECK(std::signbit(back.params[0]));
  CHECK((back.state.m.array() == ck.state.m.array()).all());
  CHECK((back.state.v.array() == ck.state.v.array()).all());
  CHECK((back.state.kappa.array() == ck.state.kappa.array()).all());
  CHECK(back.state.step == 17);
  CHECK(back.state.adam_t == 17);
  CHECK(back.state.kappa_step == 16);
  CHECK(back.state.config.kind == OptimizerKind::kPathAdam);
  CHECK(back.state.config.lr == oc.lr);
  CHECK(back.state.config.kappa_mode == KappaMode::kBothTerms);

  std::stringstream truncated(buf.str().substr(0, buf.str().size() / 2));
  CHECK_THROWS(ReadCheckpoint(truncated));
}

TEST_CASE("metrics rows") {
  MetricsRow row;
  row.step = 3;
  row.train_loss = 0.1;
  row.train_metric = 0.25;
  row.test_metric = 1.0 / 3.0;
  row.wall_ms = 0.0;
  CHECK(MetricsHeader(false) == "step,train_loss,train_metric,test_metric,wall_ms");
  CHECK(MetricsLine(row, false) == "3,0.10000000000000001,0.25,0.33333333333333331,0");
  CHECK(MetricsLine(row, true) == "3,0.10000000000000001,0.25,0.33333333333333331,,0");
}

TEST_CASE("training runs are reproducible and resumable") {
  ScratchDir dir("repro");
  std::ostringstream log;
  const TrainOutcome a = RunTraining(SmallAddition(dir / "a"), log);
  const TrainOutcome b = RunTraining(SmallAddition(dir / "b"), log);
  CHECK(a.exit_code == kExitOk);
  const std::string csv = ReadFile(dir / "a/metrics.csv");
  CHECK(csv == ReadFile(dir / "b/metrics.csv"));
  CHECK(csv.rfind("step,train_loss,train_metric,test_metric,kappa_ratio,wall_ms\n", 0) == 0);

  // Interrupt at step 40, then resume to 60.
  RunConfig part = SmallAddition(dir / "c");
  part.train.steps = 40;
  RunTraining(part, log);
  RunConfig rest = SmallAddition(dir / "c");
  rest.resume = dir / "c/checkpoint.txt";
  const TrainOutcome c = RunTraining(rest, log);
  CHECK(ReadFile(dir / "c/metrics.csv") == csv);
  CHECK((c.result.params.array() == a.result.params.array()).all());

  // The closing checkpoint holds the last step.
  const Checkpoint final_ck = LoadCheckpoint(dir / "a/checkpoint.txt");
  CHECK(final_ck.state.step == 60);

  RunConfig other = SmallAddition(dir / "c");
  other.hidden = {5};
  other.resume = dir / "c/checkpoint.txt";
  CHECK_THROWS_AS(RunTraining(other, log), ConfigError);
}

TEST_CASE("output directory override") {
  ScratchDir dir("env");
  ::setenv(kOutputDirEnv, (dir / "env_out").c_str(), 1);
  std::ostringstream log;
  RunConfig c = SmallAddition(dir / "ignored");
  c.train.steps = 5;
  const TrainOutcome o = RunTraining(c, log);
  ::unsetenv(kOutputDirEnv);
  CHECK(o.out_dir == dir / "env_out");
  CHECK(fs::exists(dir / "env_out/metrics.csv"));
  CHECK_FALSE(fs::exists(dir / "ignored"));
}

TEST_CASE("kappa-ratio study") {
  KappaRatioOptions o;
  o.hidden = {10};
  o.lengths = {4};
  o.seeds = 2;
  o.input_dim = 1;
  o.output_dim = 1;
  o.crosscheck = true;
  const auto cells = KappaRatioStudy(o);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].ratios.size() == 2);
  CHECK(cells[0].crosscheck_rel < 1e-10);
  std::ostringstream csv;
  WriteKappaRatioCsv(cells, true, csv);
  CHECK(csv.str().rfind("hidden,length,seeds,mean_ratio,sd_ratio,crosscheck_rel\n10,4,2,", 0) == 0);

  o.crosscheck = false;
  o.max_params = 10;
  CHECK_THROWS_AS(KappaRatioStudy(o), std::length_error);
}

TEST_CASE("gen-data") {
  ScratchDir dir("gen");
  GenDataOptions g;
  g.length = 100;
  g.count = 1000;
  g.out_path = dir / "a.txt";
  std::ostringstream log;
  CHECK(CmdGenData(g, log) == kExitOk);
  std::ifstream in(g.out_path);
  const Dataset d = ReadDataset(in);
  CHECK(d.size() == 1000);
  for (const auto& ex : d.examples) {
    const AdditionExample v = AdditionView(ex);
    double sum = 0.0;
    int ones = 0;
    for (int t = 0; t < 100; ++t) {
      sum += v.mask[t] * v.values[t];
      ones += v.mask[t];
    }
    CHECK(ones == 2);
    CHECK(sum == v.target);
  }
  g.out_path = dir / "b.txt";
  CmdGenData(g, log);
  CHECK(ReadFile(dir / "a.txt") == ReadFile(dir / "b.txt"));
}

TEST_CASE("command-line exit codes") {
  ScratchDir dir("exit");
  CHECK(RunCli("") == kExitUsage);
  CHECK(RunCli("frobnicate") == kExitUsage);
  CHECK(RunCli("gen-data --task addition --length 1 -o " + (dir / "x.txt")) == kExitUsage);
  CHECK(RunCli("gen-data --task addition --length 20 --count 10 -o " + (dir / "y.txt")) == kExitOk);
  CHECK(RunCli("train -c /nonexistent.cfg") == kExitUsage);
  CHECK(RunCli("train -s task=linreg -s optimizer=path_sgd -s lr=0.5 -s steps=1000 "
               "-s target_metric=1e-12 -o " + (dir / "lin")) == kExitOk);
  CHECK(ReadFile(dir / "lin/config.txt").find("task = linreg") != std::string::npos);
  CHECK(RunCli("train -s task=linreg -s optimizer=sgd -s lr=10 -s steps=1000 -o " +
               (dir / "boom")) == kExitDiverged);
  CHECK(RunCli("train -c " + std::string(PATHSGD_SOURCE_DIR) +
               "/configs/linreg.cfg -s steps=10 -o " + (dir / "cfg")) == kExitOk);
  CHECK(RunCli("verify --level quick") == kExitOk);
  CHECK(RunCli("verify --level quick --inject-kappa-fault") == kExitVerifyFailed);
  CHECK(RunCli("kappa-ratio --hidden 10 --length 4 --seeds 1 --input-dim 1 --output-dim 1 "
               "--crosscheck --csv " + (dir / "r.csv")) == kExitOk);
  CHECK(ReadFile(dir / "r.csv").rfind("hidden,length", 0) == 0);
}
