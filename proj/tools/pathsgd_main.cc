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

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pathsgd/commands.h"
#include "pathsgd/config.h"

namespace {

using namespace pathsgd;

int Dispatch(int argc, char** argv) {
  CLI::App app{"Path-SGD training and path-regularizer tools for shared-weight ReLU nets"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume;
  std::vector<std::string> overrides;
  CLI::App* train = app.add_subcommand("train", "Run a training job from a config file");
  train->add_option("-c,--config", config_path, "key = value config file");
  train->add_option("-s,--set", overrides, "Override a config key (key=value), repeatable");
  train->add_option("-o,--out", out_dir, "Output directory (env PATHSGD_OUTPUT_DIR wins)");
  train->add_option("--resume", resume, "Checkpoint to resume from");

  std::string level = "quick";
  std::uint64_t verify_seed = 1;
  bool inject_fault = false;
  CLI::App* verify = app.add_subcommand("verify", "Run the oracle and invariance property suites");
  verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--seed", verify_seed, "Instance seed");
  verify->add_flag("--inject-kappa-fault", inject_fault, "Double the closed-form kappa (self-test)")
      ->group("");

  KappaRatioOptions ratio;
  std::string ratio_csv;
  CLI::App* kr = app.add_subcommand("kappa-ratio", "Tabulate |kappa2| / |kappa1| over widths and lengths");
  kr->add_option("--hidden", ratio.hidden, "Hidden widths")->delimiter(',');
  kr->add_option("--length", ratio.lengths, "Sequence lengths")->delimiter(',');
  kr->add_option("--seeds", ratio.seeds, "Seeds per cell");
  kr->add_option("--first-seed", ratio.first_seed, "First seed");
  kr->add_option("--range", ratio.init_range, "Uniform init half-width");
  kr->add_option("--input-dim", ratio.input_dim, "Input dimension");
  kr->add_option("--output-dim", ratio.output_dim, "Output dimension");
  kr->add_flag("--crosscheck", ratio.crosscheck, "Compare with path enumeration (small nets)");
  kr->add_option("--csv", ratio_csv, "Also write the table to this file");

  GenDataOptions gen;
  std::string gen_task = "addition";
  CLI::App* gd = app.add_subcommand("gen-data", "Write a task dataset in the record-per-line format");
  gd->add_option("--task", gen_task, "addition, seqclass, charlm or linreg")
      ->check(CLI::IsMember({"addition", "seqclass", "charlm", "linreg"}));
  gd->add_option("--length", gen.length, "Sequence length (addition, charlm)");
  gd->add_option("--count", gen.count, "Number of records");
  gd->add_option("--seed", gen.seed, "Seed");
  gd->add_option("--corpus", gen.corpus, "Text file for charlm");
  gd->add_option("--slope", gen.slope, "Slope for linreg");
  gd->add_option("-o,--out", gen.out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      ConfigMap map;
      if (!config_path.empty()) map = ParseConfigFile(config_path);
      for (const auto& o : overrides) ApplyOverride(&map, o);
      if (!out_dir.empty()) map["out_dir"] = out_dir;
      if (!resume.empty()) map["resume"] = resume;
      return CmdTrain(RunConfigFromMap(map), std::cout);
    }
    if (*verify) {
      return CmdVerify(level == "full" ? VerifyLevel::kFull : VerifyLevel::kQuick, verify_seed,
                       inject_fault ? 2.0 : 1.0, std::cout);
    }
    if (*kr) {
      const auto cells = KappaRatioStudy(ratio);
      WriteKappaRatioCsv(cells, ratio.crosscheck, std::cout);
      if (!ratio_csv.empty()) {
        std::ofstream out(ratio_csv);
        if (!out) throw std::runtime_error("cannot write '" + ratio_csv + "'");
        WriteKappaRatioCsv(cells, ratio.crosscheck, out);
      }
      return kExitOk;
    }
    if (*gd) {
      gen.task = ParseTaskKind(gen_task);
      return CmdGenData(gen, std::cout);
    }
  } catch (const std::exception& e) {
    // Config, usage and I/O problems all map to the usage exit code.
    std::cerr << "pathsgd: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return Dispatch(argc, argv); }
