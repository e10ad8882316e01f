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

#include "pathsgd/config.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "pathsgd/rnn_engine.h"

#ifndef PATHSGD_DATA_DIR
#define PATHSGD_DATA_DIR "data"
#endif

namespace pathsgd {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ConfigMap ParseConfig(std::istream& in, const std::string& origin) {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    out[key] = Trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap ParseConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return ParseConfig(in, path);
}

void ApplyOverride(ConfigMap* config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || Trim(assignment.substr(0, eq)).empty()) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  (*config)[Trim(assignment.substr(0, eq))] = Trim(assignment.substr(eq + 1));
}

TaskKind ParseTaskKind(const std::string& name) {
  if (name == "addition") return TaskKind::kAddition;
  if (name == "seqclass") return TaskKind::kSeqClass;
  if (name == "charlm") return TaskKind::kCharLm;
  if (name == "linreg") return TaskKind::kLinreg;
  throw ConfigError("unknown task '" + name + "'");
}

const char* TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kAddition: return "addition";
    case TaskKind::kSeqClass: return "seqclass";
    case TaskKind::kCharLm: return "charlm";
    case TaskKind::kLinreg: return "linreg";
  }
  return "?";
}

std::string DefaultCorpusPath() { return std::string(PATHSGD_DATA_DIR) + "/midsummer.txt"; }

namespace {

// Typed access that records which keys were consumed.
class Reader {
 public:
  explicit Reader(const ConfigMap& map) : map_(map) {}

  const std::string* Find(const std::string& key) {
    used_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

  template <typename T, typename Parse>
  void Get(const std::string& key, T* out, Parse parse) {
    if (const std::string* v = Find(key)) {
      try {
        *out = parse(*v);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
    }
  }

  void CheckAllUsed() const {
    for (const auto& [key, value] : map_) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  const ConfigMap& map_;
  std::set<std::string> used_;
};

double ToDouble(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno == ERANGE) {
    throw std::invalid_argument("'" + s + "' is not a number");
  }
  return v;
}

long ToLong(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno == ERANGE) {
    throw std::invalid_argument("'" + s + "' is not an integer");
  }
  return v;
}

int ToInt(const std::string& s) { return static_cast<int>(ToLong(s)); }

bool ToBool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("'" + s + "' is not a boolean");
}

std::vector<int> ToIntList(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ToInt(Trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

}  // namespace

RunConfig RunConfigFromMap(const ConfigMap& map) {
  RunConfig c;
  Reader r(map);
  r.Get("task", &c.task, ParseTaskKind);
  if (c.task == TaskKind::kCharLm) {
    c.length = 50;
    c.bias = true;
    c.corpus = DefaultCorpusPath();
  }
  if (c.task == TaskKind::kSeqClass) c.train_size = 2000;
  r.Get("length", &c.length, ToInt);
  r.Get("train_size", &c.train_size, ToInt);
  r.Get("test_size", &c.test_size, ToInt);
  r.Get("corpus", &c.corpus, [](const std::string& s) { return s; });
  r.Get("images", &c.images, [](const std::string& s) { return s; });
  r.Get("image_noise", &c.image_noise, ToDouble);
  r.Get("linreg_slope", &c.linreg_slope, ToDouble);
  r.Get("train_fraction", &c.train_fraction, ToDouble);
  r.Get("valid_fraction", &c.valid_fraction, ToDouble);

  r.Get("hidden", &c.hidden, ToIntList);
  r.Get("bias", &c.bias, ToBool);
  r.Get("activation", &c.activation, ParseActivation);
  r.Get("init", &c.init.scheme, ParseInitScheme);
  r.Get("init_range", &c.init.range, ToDouble);
  r.Get("init_rec_range", &c.init.rec_range, ToDouble);
  r.Get("init_nonrec_range", &c.init.nonrec_range, ToDouble);

  OptimizerConfig& o = c.train.optimizer;
  r.Get("optimizer", &o.kind, ParseOptimizerKind);
  r.Get("lr", &o.lr, ToDouble);
  r.Get("kappa_mode", &o.kappa_mode, ParseKappaMode);
  r.Get("kappa_floor", &o.kappa_floor, ToDouble);
  r.Get("kappa_every", &o.kappa_every, ToInt);
  r.Get("beta1", &o.beta1, ToDouble);
  r.Get("beta2", &o.beta2, ToDouble);
  r.Get("adam_eps", &o.adam_eps, ToDouble);

  TrainConfig& t = c.train;
  r.Get("batch_size", &t.batch_size, ToInt);
  r.Get("steps", &t.steps, ToLong);
  r.Get("eval_interval", &t.eval_interval, ToLong);
  r.Get("checkpoint_interval", &t.checkpoint_interval, ToLong);
  r.Get("seed", &t.seed, [](const std::string& s) { return static_cast<std::uint64_t>(ToLong(s)); });
  r.Get("target_metric", &t.target_metric, ToDouble);
  r.Get("divergence_threshold", &t.divergence_threshold, ToDouble);
  r.Get("train_eval_size", &t.train_eval_size, ToInt);
  r.Get("log_kappa_ratio", &t.log_kappa_ratio, ToBool);
  r.Get("wall_clock", &t.wall_clock, ToBool);
  r.Get("out_dir", &c.out_dir, [](const std::string& s) { return s; });
  r.Get("resume", &c.resume, [](const std::string& s) { return s; });
  r.CheckAllUsed();

  try {
    o.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.length < 1 || c.train_size < 1 || c.test_size < 1) {
    throw ConfigError("length, train_size and test_size must be positive");
  }
  if (t.batch_size < 1 || t.steps < 0 || t.eval_interval < 1 || t.checkpoint_interval < 0) {
    throw ConfigError("batch_size and eval_interval must be positive, steps non-negative");
  }
  for (int h : c.hidden) {
    if (h < 1) throw ConfigError("hidden widths must be positive");
  }
  return c;
}

ConfigMap RunConfigToMap(const RunConfig& c) {
  ConfigMap m;
  m["task"] = TaskKindName(c.task);
  m["length"] = std::to_string(c.length);
  m["train_size"] = std::to_string(c.train_size);
  m["test_size"] = std::to_string(c.test_size);
  if (!c.corpus.empty()) m["corpus"] = c.corpus;
  if (!c.images.empty()) m["images"] = c.images;
  m["image_noise"] = FormatDouble(c.image_noise);
  m["linreg_slope"] = FormatDouble(c.linreg_slope);
  m["train_fraction"] = FormatDouble(c.train_fraction);
  m["valid_fraction"] = FormatDouble(c.valid_fraction);
  std::string hidden;
  for (size_t i = 0; i < c.hidden.size(); ++i) {
    hidden += (i ? "," : "") + std::to_string(c.hidden[i]);
  }
  m["hidden"] = hidden;
  m["bias"] = c.bias ? "true" : "false";
  m["activation"] = ActivationName(c.activation);
  m["init"] = InitSchemeName(c.init.scheme);
  m["init_range"] = FormatDouble(c.init.range);
  m["init_rec_range"] = FormatDouble(c.init.rec_range);
  m["init_nonrec_range"] = FormatDouble(c.init.nonrec_range);
  const OptimizerConfig& o = c.train.optimizer;
  m["optimizer"] = OptimizerKindName(o.kind);
  m["lr"] = FormatDouble(o.lr);
  m["kappa_mode"] = KappaModeName(o.kappa_mode);
  m["kappa_floor"] = FormatDouble(o.kappa_floor);
  m["kappa_every"] = std::to_string(o.kappa_every);
  m["beta1"] = FormatDouble(o.beta1);
  m["beta2"] = FormatDouble(o.beta2);
  m["adam_eps"] = FormatDouble(o.adam_eps);
  const TrainConfig& t = c.train;
  m["batch_size"] = std::to_string(t.batch_size);
  m["steps"] = std::to_string(t.steps);
  m["eval_interval"] = std::to_string(t.eval_interval);
  m["checkpoint_interval"] = std::to_string(t.checkpoint_interval);
  m["seed"] = std::to_string(t.seed);
  m["target_metric"] = FormatDouble(t.target_metric);
  m["divergence_threshold"] = FormatDouble(t.divergence_threshold);
  m["train_eval_size"] = std::to_string(t.train_eval_size);
  m["log_kappa_ratio"] = t.log_kappa_ratio ? "true" : "false";
  m["wall_clock"] = t.wall_clock ? "true" : "false";
  m["out_dir"] = c.out_dir;
  if (!c.resume.empty()) m["resume"] = c.resume;
  return m;
}

TaskData BuildTask(const RunConfig& c) {
  std::mt19937_64 rng = DeriveRng(c.train.seed, kStreamData);
  TaskData task;
  task.name = TaskKindName(c.task);
  try {
    switch (c.task) {
      case TaskKind::kAddition:
        task.train = GenAddition(c.length, c.train_size, rng);
        task.test = GenAddition(c.length, c.test_size, rng);
        task.metric = MetricKind::kMse;
        break;
      case TaskKind::kLinreg:
        task.train = GenLinreg(c.train_size, c.linreg_slope, rng);
        task.test = GenLinreg(c.test_size, c.linreg_slope, rng);
        task.metric = MetricKind::kMse;
        break;
      case TaskKind::kSeqClass: {
        const ImageSet images = c.images.empty()
                                    ? SyntheticDigits(c.train_size + c.test_size, rng, c.image_noise)
                                    : LoadImageSet(c.images);
        const Dataset all = GenSeqClass(images, rng);
        const double frac = static_cast<double>(c.test_size) / (c.train_size + c.test_size);
        StratifiedSplit(all, frac, rng, &task.train, &task.test);
        task.metric = MetricKind::kErrorRate;
        break;
      }
      case TaskKind::kCharLm: {
        const CharLmCorpus corpus =
            LoadCharCorpus(c.corpus, c.train_fraction, c.valid_fraction, c.length);
        task.train = CharLmDataset(corpus, corpus.train);
        task.test = CharLmDataset(corpus, corpus.test);
        task.metric = MetricKind::kBpc;
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (task.train.size() == 0 || task.test.size() == 0) {
    throw ConfigError("task produced an empty train or test split");
  }
  return task;
}

RnnSpec RunRnnSpec(const RunConfig& c, const SequenceFormat& format) {
  RnnSpec spec;
  spec.depth = static_cast<int>(c.hidden.size()) + 1;
  spec.input_dim = format.input_dim;
  spec.hidden_dims = c.hidden;
  spec.output_dim = format.output_dim;
  spec.length = format.length;
  spec.bias = c.bias;
  return spec;
}

std::unique_ptr<Model> BuildModel(const RunConfig& c, const TaskData& task) {
  if (c.task == TaskKind::kLinreg) {
    return std::make_unique<GraphModel>(BuildFeedforward({1, 1}), task.train.format, c.activation);
  }
  return std::make_unique<RnnModel>(RunRnnSpec(c, task.train.format), task.train.format,
                                    c.activation);
}

ParamVector InitialParams(const RunConfig& c, const Model& model) {
  std::mt19937_64 rng = DeriveRng(c.train.seed, kStreamInit);
  if (const auto* rnn = dynamic_cast<const RnnModel*>(&model)) {
    return InitRnnParams(rnn->engine().spec(), c.init, rng);
  }
  return InitUniform(model.num_params(), c.init.range, rng);
}

}  // namespace pathsgd
