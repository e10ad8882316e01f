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

#include "doctest.h"
#include "pathsgd/compute.h"
#include "pathsgd/invariance.h"
#include "pathsgd/optim.h"
#include "pathsgd/rnn_engine.h"
#include "pathsgd/verify.h"

using namespace pathsgd;

namespace {

RnnSpec TwoByTwo() {
  RnnSpec s;
  s.depth = 3;
  s.input_dim = 2;
  s.hidden_dims = {2, 2};
  s.output_dim = 2;
  s.length = 3;
  return s;
}

}  // namespace

TEST_CASE("identity and single-unit rescaling") {
  RnnSpec s;
  s.length = 2;
  const ParamVector ones = Eigen::VectorXd::Ones(3);
  CHECK(ApplyRescaling(s, ones, NodeScaling::Identity(s)) == ones);
  NodeScaling two = NodeScaling::Identity(s);
  two.alpha[0][0] = 2.0;
  const ParamVector q = ApplyRescaling(s, ones, two);
  CHECK(q[0] == 2.0);
  CHECK(q[1] == 1.0);
  CHECK(q[2] == 0.5);
  two.alpha[0][0] = 0.0;
  CHECK_THROWS_AS(ApplyRescaling(s, ones, two), std::invalid_argument);
  NodeScaling wrong = NodeScaling::Identity(TwoByTwo());
  CHECK_THROWS_AS(ApplyRescaling(s, ones, wrong), std::invalid_argument);
}

TEST_CASE("two hidden layers of two units, scaled by (a, b, c, d)") {
  const RnnSpec s = TwoByTwo();
  const RnnLayout l = MakeRnnLayout(s);
  std::mt19937_64 rng = DeriveRng(31, 0);
  const ParamVector p = RandomUniform(l.num_params, 1.0, rng);
  const double a = 2.0, b = 0.5, c = 3.0, d = 0.25;
  NodeScaling alpha = NodeScaling::Identity(s);
  alpha.alpha[0] << a, b;
  alpha.alpha[1] << c, d;
  const ParamVector q = ApplyRescaling(s, p, alpha);

  const Eigen::Vector2d first(a, b), second(c, d);
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      CHECK(q[l.w_in[0].index(j, k)] == doctest::Approx(p[l.w_in[0].index(j, k)] * first[j]));
      CHECK(q[l.w_rec[0].index(j, k)] ==
            doctest::Approx(p[l.w_rec[0].index(j, k)] * first[j] / first[k]));
      CHECK(q[l.w_in[1].index(j, k)] ==
            doctest::Approx(p[l.w_in[1].index(j, k)] * second[j] / first[k]));
      CHECK(q[l.w_rec[1].index(j, k)] ==
            doctest::Approx(p[l.w_rec[1].index(j, k)] * second[j] / second[k]));
      CHECK(q[l.w_out.index(j, k)] == doctest::Approx(p[l.w_out.index(j, k)] / second[k]));
    }
  }
  const SharedWeightNet net = BuildRnn(s);
  for (int n = 0; n < 10; ++n) {
    const Eigen::VectorXd x = RandomUniform(net.inputs().size(), 1.0, rng);
    const Eigen::VectorXd y0 = Forward(net, p, x).outputs;
    const Eigen::VectorXd y1 = Forward(net, q, x).outputs;
    CHECK((y0 - y1).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("random rescaling ranges") {
  const RnnSpec s = TwoByTwo();
  std::mt19937_64 rng = DeriveRng(32, 0);
  const NodeScaling none = RandomRescaling(s, rng, 0.0);
  for (const auto& layer : none.alpha) CHECK((layer.array() == 1.0).all());
  for (int n = 0; n < 50; ++n) {
    const NodeScaling r = RandomRescaling(s, rng, std::log(10.0));
    for (const auto& layer : r.alpha) {
      CHECK(layer.minCoeff() >= 0.1 - 1e-15);
      CHECK(layer.maxCoeff() <= 10.0 + 1e-14);
    }
    const NodeScaling back = r.Then(r.Inverse());
    for (const auto& layer : back.alpha) CHECK((layer.array() - 1.0).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("feasibility") {
  RnnSpec s;
  s.length = 2;
  const SharedWeightNet net = BuildRnn(s);
  std::mt19937_64 rng = DeriveRng(33, 0);
  const NodeScaling r = RandomRescaling(s, rng, std::log(10.0));
  const std::vector<double> edge = EdgeMultipliers(net, NodeMultipliers(net, r));
  CHECK(IsFeasible(net, edge));
  const ParamVector p = RandomUniform(3, 1.0, rng);
  CHECK(RelErr(ApplyEdgeScaling(net, p, edge), ApplyRescaling(s, p, r)) < 1e-15);

  // Scale only the first time copy of the hidden unit.
  std::vector<double> beta(net.num_nodes(), 1.0);
  for (int v = 0; v < net.num_nodes(); ++v) {
    const Node& n = net.nodes()[v];
    if (n.kind == NodeKind::kInternal && n.time == 1) beta[v] = 2.0;
  }
  const std::vector<double> untied = EdgeMultipliers(net, beta);
  CHECK_FALSE(IsFeasible(net, untied));
  CHECK_THROWS_AS(ApplyEdgeScaling(net, p, untied), std::invalid_argument);

  const SharedWeightNet ff = BuildFeedforward({2, 3, 3, 1});
  std::vector<double> free_beta(ff.num_nodes(), 1.0);
  for (int v = 0; v < ff.num_nodes(); ++v) {
    if (ff.nodes()[v].kind == NodeKind::kInternal) free_beta[v] = std::exp(RandomUniform(1, 2.0, rng)[0]);
  }
  CHECK(IsFeasible(ff, EdgeMultipliers(ff, free_beta)));
}

TEST_CASE("dense rescaling preserves the engine output with biases") {
  RnnSpec s = TwoByTwo();
  s.bias = true;
  std::mt19937_64 rng = DeriveRng(34, 0);
  const ParamVector p = RandomUniform(MakeRnnLayout(s).num_params, 1.0, rng);
  const ParamVector q = ApplyRescaling(s, p, RandomRescaling(s, rng, std::log(10.0)));
  const SharedWeightNet net = BuildRnn(s);
  const Eigen::VectorXd x = RandomUniform(net.inputs().size(), 1.0, rng);
  CHECK((Forward(net, p, x).outputs - Forward(net, q, x).outputs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("invariance properties") {
  for (const PropertyResult& r :
       {CheckFunctionInvariance(100, 41), CheckRescalingGroup(30, 42), CheckKappaCovariance(30, 43),
        CheckUpdateInvariance(50, 44, KappaMode::kFirstTerm),
        CheckUpdateInvariance(50, 45, KappaMode::kBothTerms), CheckSgdBreaksInvariance(46)}) {
    INFO(r.name << " worst " << r.worst << " tol " << r.tolerance);
    CHECK(r.pass());
  }
}
