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

#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "pathsgd/graph.h"
#include "pathsgd/optim.h"
#include "pathsgd/verify.h"

using namespace pathsgd;

namespace {

RnnSpec SingleUnit(int length) {
  RnnSpec s;
  s.length = length;
  return s;
}

int CountKind(const SharedWeightNet& net, NodeKind kind) {
  return static_cast<int>(std::count_if(net.nodes().begin(), net.nodes().end(),
                                        [&](const Node& n) { return n.kind == kind; }));
}

// Edge id of src -> dst given (layer, unit, time) coordinates.
int FindEdge(const SharedWeightNet& net, Node src, Node dst) {
  auto same = [](const Node& a, const Node& b) {
    return a.kind == b.kind && a.layer == b.layer && a.unit == b.unit && a.time == b.time;
  };
  for (int e = 0; e < net.num_edges(); ++e) {
    if (same(net.nodes()[net.edges()[e].src], src) && same(net.nodes()[net.edges()[e].dst], dst)) {
      return e;
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("single-unit RNN with two steps") {
  const SharedWeightNet net = BuildRnn(SingleUnit(2));
  CHECK(net.num_params() == 3);
  CHECK(CountKind(net, NodeKind::kInput) == 2);
  CHECK(CountKind(net, NodeKind::kInternal) == 2);
  CHECK(CountKind(net, NodeKind::kOutput) == 2);
  CHECK(net.num_edges() == 5);
  const int x1h1 = FindEdge(net, {NodeKind::kInput, 0, 0, 1}, {NodeKind::kInternal, 1, 0, 1});
  const int x2h2 = FindEdge(net, {NodeKind::kInput, 0, 0, 2}, {NodeKind::kInternal, 1, 0, 2});
  REQUIRE(x1h1 >= 0);
  REQUIRE(x2h2 >= 0);
  CHECK(net.edges()[x1h1].param == net.edges()[x2h2].param);
  CHECK(Validate(net).ok);
}

TEST_CASE("length-one RNN has no recurrent parameter") {
  const SharedWeightNet net = BuildRnn(SingleUnit(1));
  CHECK(net.num_params() == 2);
  CHECK(net.num_edges() == 2);
  CHECK(Validate(net).ok);
  CHECK_FALSE(MakeRnnLayout(SingleUnit(1)).has_recurrent());
}

TEST_CASE("two hidden layers parameter count") {
  RnnSpec s;
  s.depth = 3;
  s.input_dim = 2;
  s.hidden_dims = {3, 3};
  s.output_dim = 2;
  s.length = 4;
  CHECK(BuildRnn(s).num_params() == 39);
  CHECK(MakeRnnLayout(s).num_params == 39);
}

TEST_CASE("layout is row-major and ordered per layer") {
  RnnSpec s;
  s.input_dim = 2;
  s.hidden_dims = {3};
  s.output_dim = 1;
  s.length = 3;
  s.bias = true;
  const RnnLayout l = MakeRnnLayout(s);
  CHECK(l.w_in[0].offset == 0);
  CHECK(l.w_in[0].index(1, 0) == 2);
  CHECK(l.w_rec[0].offset == 6);
  CHECK(l.b_hidden[0].offset == 15);
  CHECK(l.w_out.offset == 18);
  CHECK(l.b_out.offset == 21);
  CHECK(l.num_params == 22);
}

TEST_CASE("feedforward nets have no sharing") {
  CHECK(BuildFeedforward({2, 3, 1}).num_params() == 9);
  CHECK(BuildFeedforward({1, 1}).num_params() == 1);
  const SharedWeightNet net = BuildFeedforward({4, 4, 4, 4});
  CHECK(net.num_params() == 48);
  for (int i = 0; i < net.num_params(); ++i) CHECK(EdgesForParam(net, i).size() == 1);
  CHECK(Validate(net).ok);
  CHECK_THROWS_AS(BuildFeedforward({3}), std::invalid_argument);
  CHECK_THROWS_AS(BuildFeedforward({}), std::invalid_argument);
}

TEST_CASE("edges for the recurrent parameter of a three-step RNN") {
  const SharedWeightNet net = BuildRnn(SingleUnit(3));
  const int rec = MakeRnnLayout(SingleUnit(3)).w_rec[0].offset;
  std::vector<int> edges = EdgesForParam(net, rec);
  std::sort(edges.begin(), edges.end());
  std::vector<int> expected = {
      FindEdge(net, {NodeKind::kInternal, 1, 0, 1}, {NodeKind::kInternal, 1, 0, 2}),
      FindEdge(net, {NodeKind::kInternal, 1, 0, 2}, {NodeKind::kInternal, 1, 0, 3})};
  std::sort(expected.begin(), expected.end());
  CHECK(edges == expected);
}

TEST_CASE("edges for the input parameter of a two-step RNN") {
  const SharedWeightNet net = BuildRnn(SingleUnit(2));
  std::vector<int> edges = EdgesForParam(net, 0);
  std::sort(edges.begin(), edges.end());
  std::vector<int> expected = {
      FindEdge(net, {NodeKind::kInput, 0, 0, 1}, {NodeKind::kInternal, 1, 0, 1}),
      FindEdge(net, {NodeKind::kInput, 0, 0, 2}, {NodeKind::kInternal, 1, 0, 2})};
  std::sort(expected.begin(), expected.end());
  CHECK(edges == expected);
  CHECK_THROWS_AS(EdgesForParam(net, -1), std::out_of_range);
  CHECK_THROWS_AS(EdgesForParam(net, 3), std::out_of_range);
}

TEST_CASE("validation names the first violated invariant") {
  std::vector<Node> nodes = {{NodeKind::kInput, 0, 0, 0},
                             {NodeKind::kInternal, 1, 0, 0},
                             {NodeKind::kInternal, 1, 1, 0},
                             {NodeKind::kOutput, 2, 0, 0}};
  SUBCASE("cycle") {
    const SharedWeightNet net(nodes, {{0, 1, 0}, {1, 2, 1}, {2, 1, 2}, {2, 3, 3}}, 4);
    CHECK(Validate(net).invariant == "acyclicity");
  }
  SUBCASE("parameter index below range") {
    const SharedWeightNet net(nodes, {{0, 1, -1}, {1, 2, 0}, {2, 3, 1}}, 2);
    CHECK(Validate(net).invariant == "param index range");
  }
  SUBCASE("parameter index at m") {
    const SharedWeightNet net(nodes, {{0, 1, 0}, {1, 2, 1}, {2, 3, 2}}, 2);
    CHECK(Validate(net).invariant == "param index range");
  }
  SUBCASE("unused parameter") {
    const SharedWeightNet net(nodes, {{0, 1, 0}, {1, 2, 0}, {2, 3, 0}}, 2);
    CHECK(Validate(net).invariant == "param coverage");
  }
  SUBCASE("edge into an input") {
    std::vector<Node> bad = nodes;
    bad[1].kind = NodeKind::kInput;
    const SharedWeightNet net(bad, {{0, 1, 0}, {1, 2, 1}, {2, 3, 2}}, 3);
    CHECK(Validate(net).invariant == "source in-degree");
  }
  SUBCASE("edge out of an output") {
    std::vector<Node> bad = nodes;
    bad[2].kind = NodeKind::kOutput;
    const SharedWeightNet net(bad, {{0, 1, 0}, {1, 2, 1}, {2, 3, 2}}, 3);
    CHECK(Validate(net).invariant == "output out-degree");
  }
  SUBCASE("backward edge in an acyclic net") {
    std::vector<Node> order = {nodes[0], nodes[2], nodes[1], nodes[3]};
    const SharedWeightNet net(order, {{0, 2, 0}, {2, 1, 1}, {1, 3, 2}}, 3);
    CHECK(Validate(net).invariant == "topological order");
  }
  SUBCASE("dangling endpoint") {
    const SharedWeightNet net(nodes, {{0, 7, 0}}, 1);
    CHECK(Validate(net).invariant == "edge endpoint range");
  }
}

TEST_CASE("invalid specs are rejected") {
  RnnSpec s;
  s.depth = 1;
  CHECK_THROWS_WITH_AS(BuildRnn(s), doctest::Contains("depth"), std::invalid_argument);
  s = RnnSpec();
  s.length = 0;
  CHECK_THROWS_WITH_AS(BuildRnn(s), doctest::Contains("length"), std::invalid_argument);
  s = RnnSpec();
  s.hidden_dims = {2, 2};
  CHECK_THROWS_WITH_AS(BuildRnn(s), doctest::Contains("hidden_dims"), std::invalid_argument);
  s = RnnSpec();
  s.input_dim = 0;
  CHECK_THROWS_AS(BuildRnn(s), std::invalid_argument);
}

TEST_CASE("random RNNs: validity, edge count and partition") {
  std::mt19937_64 rng = DeriveRng(7, 0);
  RnnDraw draw;
  draw.max_layers = 3;
  draw.max_hidden = 4;
  draw.max_length = 6;
  draw.max_input = 3;
  draw.max_output = 3;
  for (int n = 0; n < 200; ++n) {
    const RnnSpec s = RandomRnnSpec(rng, draw);
    const SharedWeightNet net = BuildRnn(s);
    REQUIRE(Validate(net).ok);
    long expected = 0;
    int prev = s.input_dim;
    for (int h : s.hidden_dims) {
      expected += static_cast<long>(s.length) * h * prev + static_cast<long>(s.length - 1) * h * h;
      if (s.bias) expected += s.length * h;
      prev = h;
    }
    expected += static_cast<long>(s.length) * s.output_dim * prev;
    if (s.bias) expected += s.length * s.output_dim;
    CHECK(net.num_edges() == expected);
    std::vector<int> seen(net.num_edges(), 0);
    for (int i = 0; i < net.num_params(); ++i) {
      for (int e : EdgesForParam(net, i)) ++seen[e];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("bias node feeds every hidden and output node") {
  RnnSpec s;
  s.hidden_dims = {2};
  s.length = 3;
  s.bias = true;
  const SharedWeightNet net = BuildRnn(s);
  REQUIRE(net.bias_node() >= 0);
  CHECK(net.out_edges(net.bias_node()).size() == 3u * (2 + 1));
  CHECK(Validate(net).ok);
}

TEST_CASE("text dump round trip") {
  RnnSpec s;
  s.input_dim = 2;
  s.hidden_dims = {2};
  s.length = 3;
  s.bias = true;
  const SharedWeightNet net = BuildRnn(s);
  std::stringstream buf;
  WriteNetText(net, buf);
  const SharedWeightNet back = ReadNetText(buf);
  CHECK(back.num_nodes() == net.num_nodes());
  CHECK(back.num_params() == net.num_params());
  REQUIRE(back.rnn_spec().has_value());
  CHECK(*back.rnn_spec() == s);
  for (int e = 0; e < net.num_edges(); ++e) {
    CHECK(back.edges()[e].src == net.edges()[e].src);
    CHECK(back.edges()[e].dst == net.edges()[e].dst);
    CHECK(back.edges()[e].param == net.edges()[e].param);
  }
  std::stringstream bad("pathsgd-net 9\n");
  CHECK_THROWS(ReadNetText(bad));
}
