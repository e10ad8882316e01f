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

#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "pathsgd/model.h"
#include "pathsgd/optim.h"
#include "pathsgd/tasks.h"

using namespace pathsgd;

namespace {

std::string Serialize(const Dataset& d) {
  std::ostringstream out;
  WriteDataset(d, out);
  return out.str();
}

// Trains a one-layer RNN on a character stream and returns the test BPC.
double TrainCharLm(const std::string& text, int hidden, long steps, double lr) {
  const CharLmCorpus corpus = MakeCharCorpus(text, 0.8, 0.0, 10);
  TaskData task;
  task.train = CharLmDataset(corpus, corpus.train);
  task.test = CharLmDataset(corpus, corpus.test);
  task.metric = MetricKind::kBpc;
  RnnSpec s;
  s.input_dim = s.output_dim = static_cast<int>(corpus.alphabet.size());
  s.hidden_dims = {hidden};
  s.length = 10;
  s.bias = true;
  const RnnModel model(s, task.train.format);
  TrainConfig c;
  c.optimizer.kind = OptimizerKind::kPathAdam;
  c.optimizer.lr = lr;
  c.steps = steps;
  c.eval_interval = steps;
  c.batch_size = 16;
  std::mt19937_64 rng = DeriveRng(9, kStreamInit);
  InitConfig init;
  init.rec_range = 0.01;
  init.nonrec_range = 0.2;
  const TrainResult r = TrainLoop(model, task, c, InitRnnParams(s, init, rng),
                                  OptimizerState::Init(c.optimizer, model.num_params()));
  return r.final_test_metric;
}

}  // namespace

TEST_CASE("addition examples") {
  std::mt19937_64 rng = DeriveRng(61, kStreamData);
  const int T = 40;
  const auto examples = GenAdditionExamples(T, 500, rng);
  double sq = 0.0;
  for (const auto& ex : examples) {
    REQUIRE(ex.values.size() == static_cast<size_t>(T));
    int ones = 0;
    double sum = 0.0;
    for (int t = 0; t < T; ++t) {
      CHECK(ex.values[t] >= 0.0);
      CHECK(ex.values[t] <= 1.0);
      if (ex.mask[t] == 1) {
        ++ones;
        sum += ex.values[t];
        CHECK(((t < T / 2) == (ones == 1)));
      } else {
        CHECK(ex.mask[t] == 0);
      }
    }
    CHECK(ones == 2);
    CHECK(ex.target == sum);
    sq += (ex.target - 1.0) * (ex.target - 1.0);
  }
  // Constant predictor at the target mean: MSE is Var(u1 + u2) = 1/6.
  CHECK(sq / examples.size() == doctest::Approx(1.0 / 6.0).epsilon(0.1));

  std::mt19937_64 a = DeriveRng(62, kStreamData), b = DeriveRng(62, kStreamData);
  const Dataset da = GenAddition(T, 50, a), db = GenAddition(T, 50, b);
  CHECK(Serialize(da) == Serialize(db));
  for (const auto& ex : da.examples) {
    const AdditionExample v = AdditionView(ex);
    double sum = 0.0;
    for (int t = 0; t < T; ++t) sum += v.mask[t] * v.values[t];
    CHECK(sum == v.target);
  }
  CHECK(da.format.input_dim == 2);
  CHECK(da.format.readout == Readout::kLastStep);
  std::mt19937_64 c = DeriveRng(63, 0);
  CHECK_THROWS_AS(GenAdditionExamples(1, 5, c), std::invalid_argument);
}

TEST_CASE("constant predictor metric on a large addition sample") {
  std::mt19937_64 rng = DeriveRng(64, kStreamData);
  const Dataset d = GenAddition(10, 20000, rng);
  std::vector<Eigen::MatrixXd> outputs(d.size(), Eigen::MatrixXd::Ones(1, 1));
  std::vector<Eigen::MatrixXd> targets;
  for (const auto& ex : d.examples) targets.push_back(ex.targets);
  CHECK(MetricMse(outputs, targets) == doctest::Approx(1.0 / 6.0).epsilon(0.03));
}

TEST_CASE("sequential classification") {
  std::mt19937_64 rng = DeriveRng(65, kStreamData);
  const ImageSet images = SyntheticDigits(300, rng);
  CHECK(images.width == 8);
  CHECK(images.height == 8);
  const Dataset d = GenSeqClass(images, rng);
  CHECK(d.format.length == 64);
  CHECK(d.format.input_dim == 1);
  CHECK(d.format.output_dim == 10);
  CHECK(d.format.loss == LossKind::kSoftmaxXent);

  ImageSet one;
  one.width = 2;
  one.height = 2;
  one.num_classes = 2;
  Eigen::VectorXd pix(4);
  pix << 0.1, 0.2, 0.3, 0.4;
  one.images = {pix};
  one.labels = {1};
  const Dataset single = GenSeqClass(one, rng);
  for (int t = 0; t < 4; ++t) CHECK(single.examples[0].inputs(t, 0) == pix[t]);
  CHECK(single.examples[0].labels == std::vector<int>{1});

  one.images.push_back(Eigen::VectorXd::Zero(3));
  one.labels.push_back(0);
  CHECK_THROWS(GenSeqClass(one, rng));

  Dataset train, test;
  StratifiedSplit(d, 0.2, rng, &train, &test);
  CHECK(train.size() + test.size() == d.size());
  std::map<int, int> all, held;
  for (const auto& ex : d.examples) ++all[ex.labels[0]];
  for (const auto& ex : test.examples) ++held[ex.labels[0]];
  for (const auto& [label, n] : all) CHECK(std::abs(held[label] - 0.2 * n) <= 0.5 + 1e-9);
}

TEST_CASE("character corpus") {
  std::string text;
  for (int i = 0; i < 1000; ++i) text += static_cast<char>('a' + (i * 7919) % 5);
  const CharLmCorpus c = MakeCharCorpus(text, 0.8, 0.1, 10);
  CHECK(c.train.size() == 800);
  CHECK(c.valid.size() == 100);
  CHECK(c.test.size() == 100);
  CHECK(c.alphabet == "abcde");
  CHECK(c.symbol('c') == 2);
  for (size_t i = 0; i < 800; ++i) CHECK(c.train[i] == text[i] - 'a');

  const Dataset d = CharLmDataset(c, c.train);
  CHECK(d.format.readout == Readout::kEveryStep);
  CHECK(d.size() == 79);  // windows need unroll + 1 symbols
  const SequenceExample& w = d.examples[1];
  for (int t = 0; t < 10; ++t) {
    CHECK(w.inputs(t, c.train[10 + t]) == 1.0);
    CHECK(w.inputs.row(t).sum() == 1.0);
    CHECK(w.labels[t] == c.train[11 + t]);
  }
  CHECK_THROWS(MakeCharCorpus("", 0.8, 0.1, 10));
  CHECK_THROWS(LoadCharCorpus("/nonexistent/corpus.txt", 0.8, 0.1, 10));
}

TEST_CASE("metrics") {
  const int k = 7;
  std::vector<Eigen::MatrixXd> logits(3, Eigen::MatrixXd::Constant(4, k, 0.3));
  std::vector<std::vector<int>> labels(3, std::vector<int>{0, 6, 3, 2});
  CHECK(std::abs(MetricBpc(logits, labels) - std::log2(k)) < 1e-12);

  std::vector<Eigen::MatrixXd> sure(1, Eigen::MatrixXd::Zero(2, 3));
  sure[0](0, 1) = 60;
  sure[0](1, 2) = 60;
  CHECK(MetricBpc(sure, {{1, 2}}) < 1e-20);
  CHECK(MetricErrorRate(sure, {{1, 2}}) == 0.0);
  CHECK(MetricErrorRate(sure, {{0, 0}}) == 1.0);
  CHECK(MetricErrorRate(sure, {{1, 0}}) == 0.5);

  std::vector<Eigen::MatrixXd> y(2, Eigen::MatrixXd::Constant(1, 1, 0.5));
  CHECK(MetricMse(y, y) == 0.0);
  CHECK(MetricMse(y, {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1)}) == 0.25);
  CHECK_THROWS(MetricMse(y, {Eigen::MatrixXd::Zero(1, 1)}));
  CHECK_THROWS(MetricBpc(logits, {{0, 1}}));
}

TEST_CASE("linear regression data") {
  std::mt19937_64 rng = DeriveRng(66, kStreamData);
  const Dataset d = GenLinreg(100, 2.0, rng);
  for (const auto& ex : d.examples) {
    CHECK(std::abs(ex.inputs(0, 0)) <= 1.0);
    CHECK(ex.targets(0, 0) == 2.0 * ex.inputs(0, 0));
  }
}

TEST_CASE("a deterministic alternation is learnable") {
  std::string text;
  for (int i = 0; i < 2000; ++i) text += (i % 2 == 0) ? 'a' : 'b';
  CHECK(TrainCharLm(text, 8, 1500, 1e-2) < 0.05);
}

TEST_CASE("a uniform random stream cannot be compressed") {
  std::mt19937_64 rng = DeriveRng(67, kStreamData);
  std::uniform_int_distribution<int> pick(0, 3);
  std::string text;
  for (int i = 0; i < 6000; ++i) text += static_cast<char>('a' + pick(rng));
  CHECK(TrainCharLm(text, 8, 1500, 1e-2) >= 2.0 - 0.05);
}
