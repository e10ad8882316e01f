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

// Node-wise rescalings. In edge form a rescaling multiplies w_{u->v} by
// beta_v / beta_u, with beta = 1 on input, bias and output nodes. On an RNN
// it is feasible (keeps shared weights equal) exactly when beta is tied
// across time, i.e. given by one alpha^i_j per hidden unit.

#ifndef PATHSGD_INVARIANCE_H_
#define PATHSGD_INVARIANCE_H_

#include <random>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/compute.h"
#include "pathsgd/graph.h"

namespace pathsgd {

// alpha[i - 1][j] scales hidden unit j of hidden layer i (1 <= i < depth).
struct NodeScaling {
  std::vector<Eigen::VectorXd> alpha;

  static NodeScaling Identity(const RnnSpec& spec);
  NodeScaling Inverse() const;
  // Elementwise product, i.e. applying *this and then other.
  NodeScaling Then(const NodeScaling& other) const;
};

// Rescales W_in (alpha^i_j / alpha^{i-1}_k, with alpha^0 = 1), W_rec
// (alpha^i_j / alpha^i_k), W_out (1 / alpha^{d-1}_k) and hidden biases
// (alpha^i_j). Throws std::invalid_argument on nonpositive alpha or shape
// mismatch.
ParamVector ApplyRescaling(const RnnSpec& spec, const ParamVector& p,
                           const NodeScaling& scaling);

// Each alpha^i_j = exp(u) with u ~ U[-log_range, log_range].
NodeScaling RandomRescaling(const RnnSpec& spec, std::mt19937_64& rng, double log_range);

// beta per node of a BuildRnn net: alpha at hidden units (tied over time),
// 1 elsewhere.
std::vector<double> NodeMultipliers(const SharedWeightNet& net, const NodeScaling& scaling);

// beta_v / beta_u for every edge.
std::vector<double> EdgeMultipliers(const SharedWeightNet& net, const std::vector<double>& beta);

// True iff all edges sharing a parameter get the same multiplier (relative
// tolerance 1e-12), so the transformed weights stay shared for every p.
bool IsFeasible(const SharedWeightNet& net, const std::vector<double>& edge_scaling);

// Applies a feasible edge scaling to the parameters. Throws
// std::invalid_argument when the scaling is infeasible.
ParamVector ApplyEdgeScaling(const SharedWeightNet& net, const ParamVector& p,
                             const std::vector<double>& edge_scaling);

}  // namespace pathsgd

#endif  // PATHSGD_INVARIANCE_H_
