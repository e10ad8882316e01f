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

#include "pathsgd/invariance.h"

#include <cmath>
#include <stdexcept>

#include "pathsgd/rnn_engine.h"

namespace pathsgd {

NodeScaling NodeScaling::Identity(const RnnSpec& spec) {
  NodeScaling s;
  for (int h : spec.hidden_dims) s.alpha.push_back(Eigen::VectorXd::Ones(h));
  return s;
}

NodeScaling NodeScaling::Inverse() const {
  NodeScaling s;
  for (const auto& a : alpha) s.alpha.push_back(a.cwiseInverse());
  return s;
}

NodeScaling NodeScaling::Then(const NodeScaling& other) const {
  if (other.alpha.size() != alpha.size()) {
    throw std::invalid_argument("NodeScaling::Then: layer count mismatch");
  }
  NodeScaling s;
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i].size() != other.alpha[i].size()) {
      throw std::invalid_argument("NodeScaling::Then: layer width mismatch");
    }
    s.alpha.push_back(alpha[i].cwiseProduct(other.alpha[i]));
  }
  return s;
}

namespace {

void CheckScaling(const RnnSpec& spec, const NodeScaling& scaling) {
  if (scaling.alpha.size() != spec.hidden_dims.size()) {
    throw std::invalid_argument("NodeScaling: expected one vector per hidden layer");
  }
  for (size_t i = 0; i < scaling.alpha.size(); ++i) {
    if (scaling.alpha[i].size() != spec.hidden_dims[i]) {
      throw std::invalid_argument("NodeScaling: layer " + std::to_string(i + 1) +
                                  " has the wrong width");
    }
    if (!(scaling.alpha[i].array() > 0.0).all() || !scaling.alpha[i].allFinite()) {
      throw std::invalid_argument("NodeScaling: alpha must be positive and finite");
    }
  }
}

}  // namespace

ParamVector ApplyRescaling(const RnnSpec& spec, const ParamVector& p,
                           const NodeScaling& scaling) {
  const RnnLayout layout = MakeRnnLayout(spec);
  if (p.size() != layout.num_params) {
    throw std::invalid_argument("ApplyRescaling: parameter vector does not match the spec");
  }
  CheckScaling(spec, scaling);
  ParamVector out = p;
  const int d = spec.depth;
  for (int i = 1; i < d; ++i) {
    const Eigen::VectorXd& a = scaling.alpha[i - 1];
    auto w_in = BlockView(out, layout.w_in[i - 1]);
    w_in = a.asDiagonal() * w_in;
    if (i > 1) w_in = w_in * scaling.alpha[i - 2].cwiseInverse().asDiagonal();
    if (layout.has_recurrent()) {
      auto w_rec = BlockView(out, layout.w_rec[i - 1]);
      w_rec = a.asDiagonal() * w_rec * a.cwiseInverse().asDiagonal();
    }
    if (spec.bias) {
      auto b = BlockView(out, layout.b_hidden[i - 1]);
      b.col(0) = b.col(0).cwiseProduct(a);
    }
  }
  auto w_out = BlockView(out, layout.w_out);
  w_out = w_out * scaling.alpha[d - 2].cwiseInverse().asDiagonal();
  return out;
}

NodeScaling RandomRescaling(const RnnSpec& spec, std::mt19937_64& rng, double log_range) {
  if (!(log_range >= 0.0)) throw std::invalid_argument("RandomRescaling: log_range must be >= 0");
  spec.Validate();
  NodeScaling s;
  std::uniform_real_distribution<double> u(-log_range, log_range);
  for (int h : spec.hidden_dims) {
    Eigen::VectorXd a(h);
    for (int j = 0; j < h; ++j) a[j] = log_range == 0.0 ? 1.0 : std::exp(u(rng));
    s.alpha.push_back(std::move(a));
  }
  return s;
}

std::vector<double> NodeMultipliers(const SharedWeightNet& net, const NodeScaling& scaling) {
  if (!net.rnn_spec()) throw std::invalid_argument("NodeMultipliers: net is not an unrolled RNN");
  CheckScaling(*net.rnn_spec(), scaling);
  std::vector<double> beta(net.num_nodes(), 1.0);
  for (int v = 0; v < net.num_nodes(); ++v) {
    const Node& node = net.nodes()[v];
    if (node.kind == NodeKind::kInternal) beta[v] = scaling.alpha[node.layer - 1][node.unit];
  }
  return beta;
}

std::vector<double> EdgeMultipliers(const SharedWeightNet& net, const std::vector<double>& beta) {
  if (static_cast<int>(beta.size()) != net.num_nodes()) {
    throw std::invalid_argument("EdgeMultipliers: need one beta per node");
  }
  std::vector<double> scale;
  scale.reserve(net.edges().size());
  for (const Edge& e : net.edges()) scale.push_back(beta[e.dst] / beta[e.src]);
  return scale;
}

bool IsFeasible(const SharedWeightNet& net, const std::vector<double>& edge_scaling) {
  if (static_cast<int>(edge_scaling.size()) != net.num_edges()) {
    throw std::invalid_argument("IsFeasible: need one multiplier per edge");
  }
  for (int i = 0; i < net.num_params(); ++i) {
    auto edges = net.param_edges(i);
    if (edges.empty()) continue;
    const double first = edge_scaling[edges[0]];
    for (int e : edges) {
      const double s = edge_scaling[e];
      if (std::abs(s - first) > 1e-12 * std::max(std::abs(s), std::abs(first))) return false;
    }
  }
  return true;
}

ParamVector ApplyEdgeScaling(const SharedWeightNet& net, const ParamVector& p,
                             const std::vector<double>& edge_scaling) {
  if (!IsFeasible(net, edge_scaling)) {
    throw std::invalid_argument("ApplyEdgeScaling: scaling breaks weight sharing");
  }
  ParamVector out = p;
  for (int i = 0; i < net.num_params(); ++i) {
    auto edges = net.param_edges(i);
    if (!edges.empty()) out[i] = p[i] * edge_scaling[edges[0]];
  }
  return out;
}

}  // namespace pathsgd
