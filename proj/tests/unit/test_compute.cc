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
#include <vector>

#include "doctest.h"
#include "pathsgd/compute.h"
#include "pathsgd/model.h"
#include "pathsgd/optim.h"
#include "pathsgd/verify.h"

using namespace pathsgd;

namespace {

SharedWeightNet TwoStepUnit() {
  RnnSpec s;
  s.length = 2;
  return BuildRnn(s);
}

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("forward on the two-step unit") {
  const SharedWeightNet net = TwoStepUnit();
  const ForwardResult r = Forward(net, Vec({1, 1, 1}), Vec({0.5, 0.25}));
  CHECK(r.outputs[0] == 0.5);
  CHECK(r.outputs[1] == 0.75);

  const ForwardResult clipped = Forward(net, Vec({1, 1, 1}), Vec({-1, -1}));
  CHECK(clipped.outputs[0] == 0.0);
  CHECK(clipped.outputs[1] == 0.0);

  const ForwardResult zero = Forward(net, Eigen::VectorXd::Zero(3), Vec({0.5, 0.25}));
  CHECK(zero.outputs.isZero(0.0));

  CHECK_THROWS_AS(Forward(net, Vec({1, 1, 1}), Vec({1})), std::invalid_argument);
  CHECK_THROWS_AS(Forward(net, Vec({1, 1}), Vec({1, 1})), std::invalid_argument);
}

TEST_CASE("trace obeys the node equations") {
  std::mt19937_64 rng = DeriveRng(3, 0);
  RnnSpec s;
  s.input_dim = 2;
  s.hidden_dims = {3};
  s.output_dim = 2;
  s.length = 3;
  s.bias = true;
  const SharedWeightNet net = BuildRnn(s);
  const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
  const Eigen::VectorXd x = RandomUniform(net.inputs().size(), 1.0, rng);
  const ForwardResult r = Forward(net, p, x);
  for (int v = 0; v < net.num_nodes(); ++v) {
    const NodeKind k = net.nodes()[v].kind;
    if (k == NodeKind::kInternal) {
      CHECK(r.trace.value[v] == std::max(r.trace.pre[v], 0.0));
      CHECK(r.trace.active[v] == (r.trace.pre[v] > 0));
    } else if (k == NodeKind::kOutput) {
      CHECK(r.trace.value[v] == r.trace.pre[v]);
    }
  }
  for (size_t i = 0; i < net.inputs().size(); ++i) CHECK(r.trace.value[net.inputs()[i]] == x[i]);
  const ForwardResult again = Forward(net, p, x);
  CHECK((again.outputs.array() == r.outputs.array()).all());
}

TEST_CASE("losses") {
  CHECK(Mse(Vec({0.75}), Vec({0.75})) == 0.0);
  CHECK(Mse(Vec({1.0}), Vec({0.0})) == 1.0);
  CHECK(SoftmaxXent(Vec({0, 0}), 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(SoftmaxXent(Vec({1000, 0}), 0) == doctest::Approx(0.0));
  CHECK(std::isfinite(SoftmaxXent(Vec({0, 1000}), 0)));
  CHECK_THROWS(SoftmaxXent(Vec({0, 0}), 2));
  CHECK_THROWS(SoftmaxXent(Vec({0, 0}), -1));
  CHECK_THROWS(Mse(Vec({0, 0}), Vec({0})));
}

TEST_CASE("gradient examples") {
  const SharedWeightNet net = TwoStepUnit();
  std::vector<Example> batch = {
      {Vec({0.5, 0.25}), Target::Regression({0, 1}, Vec({0.5, 0.75}))}};
  const LossGrad lg = LossAndGrad(net, Vec({1, 1, 1}), batch, LossKind::kMse);
  CHECK(lg.loss == 0.0);
  CHECK(lg.grad.isZero(0.0));

  const SharedWeightNet edge = BuildFeedforward({1, 1});
  std::vector<Example> one = {{Vec({1.0}), Target::Regression({0}, Vec({0.0}))}};
  CHECK(Grad(edge, Vec({1.0}), one, LossKind::kMse)[0] == 2.0);
  CHECK(FiniteDiffGrad(edge, Vec({1.0}), one, LossKind::kMse)[0] == doctest::Approx(2.0));
  CHECK_THROWS(Grad(edge, Vec({1.0}), std::span<const Example>(), LossKind::kMse));
}

TEST_CASE("zero parameters give zero loss and gradient on zero targets") {
  std::mt19937_64 rng = DeriveRng(4, 0);
  for (int n = 0; n < 20; ++n) {
    const RnnSpec s = RandomRnnSpec(rng);
    const SharedWeightNet net = BuildRnn(s);
    std::vector<int> outs(net.outputs().size());
    for (size_t i = 0; i < outs.size(); ++i) outs[i] = static_cast<int>(i);
    std::vector<Example> batch = {{RandomUniform(net.inputs().size(), 1.0, rng),
                                   Target::Regression(outs, Eigen::VectorXd::Zero(outs.size()))}};
    const LossGrad lg = LossAndGrad(net, Eigen::VectorXd::Zero(net.num_params()), batch,
                                    LossKind::kMse);
    CHECK(lg.loss == 0.0);
    CHECK(lg.grad.isZero(0.0));
  }
}

TEST_CASE("batch gradient is the mean of per-example gradients") {
  const SharedWeightNet net = BuildFeedforward({2, 2, 1});
  std::mt19937_64 rng = DeriveRng(5, 0);
  const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
  std::vector<Example> batch;
  for (int i = 0; i < 4; ++i) {
    batch.push_back({RandomUniform(2, 1.0, rng), Target::Regression({0}, RandomUniform(1, 1.0, rng))});
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(net.num_params());
  for (const auto& ex : batch) sum += Grad(net, p, std::span<const Example>(&ex, 1), LossKind::kMse);
  CHECK(RelErr(Grad(net, p, batch, LossKind::kMse), sum / 4.0) < 1e-15);
}

TEST_CASE("gradient matches central differences on random RNNs") {
  const PropertyResult r = CheckGradient(50, 11);
  INFO("worst " << r.worst);
  CHECK(r.pass());
  CHECK(r.tolerance == 1e-5);
}

TEST_CASE("softmax gradient matches central differences") {
  RnnSpec s;
  s.input_dim = 2;
  s.hidden_dims = {2};
  s.output_dim = 3;
  s.length = 2;
  const SharedWeightNet net = BuildRnn(s);
  std::mt19937_64 rng = DeriveRng(6, 0);
  const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
  std::vector<Example> batch = {
      {RandomUniform(4, 1.0, rng), Target::Classes({3, 4, 5}, {2})},
      {RandomUniform(4, 1.0, rng), Target::Classes({0, 1, 2, 3, 4, 5}, {0, 1})}};
  REQUIRE(MinAbsPreActivation(net, p, batch) > 1e-4);
  CHECK(RelErr(Grad(net, p, batch, LossKind::kSoftmaxXent),
               FiniteDiffGrad(net, p, batch, LossKind::kSoftmaxXent)) < 1e-5);
}

TEST_CASE("dense engine agrees with the graph engine") {
  const PropertyResult r = CheckEngineAgreement(30, 12);
  INFO("worst " << r.worst);
  CHECK(r.pass());
}
