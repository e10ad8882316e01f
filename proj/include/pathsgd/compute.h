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

// Forward evaluation and reverse-mode gradients on an arbitrary
// SharedWeightNet. This is the reference engine; RnnEngine is the dense fast
// path for unrolled RNNs and is tested against it.

#ifndef PATHSGD_COMPUTE_H_
#define PATHSGD_COMPUTE_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/graph.h"

namespace pathsgd {

// Free parameters p, one entry per shared weight.
using ParamVector = Eigen::VectorXd;

enum class Activation { kRelu, kTanh };
enum class LossKind { kMse, kSoftmaxXent };

Activation ParseActivation(const std::string& name);
LossKind ParseLossKind(const std::string& name);
const char* ActivationName(Activation a);

// Throws std::invalid_argument if any entry is NaN or infinite.
void CheckFinite(const Eigen::VectorXd& v, const char* what);

struct ActivationTrace {
  Eigen::VectorXd value;  // h_v
  Eigen::VectorXd pre;    // summed input (equals value at input/bias nodes)
  std::vector<bool> active;  // pre > 0, internal nodes only
};

struct ForwardResult {
  Eigen::VectorXd outputs;  // in net.outputs() order
  ActivationTrace trace;
};

ForwardResult Forward(const SharedWeightNet& net, const ParamVector& p,
                      const Eigen::VectorXd& x, Activation act = Activation::kRelu);

// Which output coordinates a loss reads, and what it compares them with.
// MSE: values[r] is the target for outputs[r]. Softmax cross-entropy:
// outputs is split into labels.size() equal consecutive groups of logits.
struct Target {
  std::vector<int> outputs;
  Eigen::VectorXd values;
  std::vector<int> labels;

  static Target Regression(std::vector<int> outputs, Eigen::VectorXd values);
  static Target Classes(std::vector<int> outputs, std::vector<int> labels);
};

struct Example {
  Eigen::VectorXd input;
  Target target;
};

double Mse(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target);
double SoftmaxXent(const Eigen::VectorXd& logits, int label);

// Loss of one network output vector against a target.
double Loss(const Eigen::VectorXd& outputs, const Target& target, LossKind kind);

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Mean loss over the batch and its exact gradient w.r.t. p. The ReLU
// subgradient at a pre-activation of exactly 0 is 0.
LossGrad LossAndGrad(const SharedWeightNet& net, const ParamVector& p,
                     std::span<const Example> batch, LossKind kind,
                     Activation act = Activation::kRelu);

Eigen::VectorXd Grad(const SharedWeightNet& net, const ParamVector& p,
                     std::span<const Example> batch, LossKind kind,
                     Activation act = Activation::kRelu);

double BatchLoss(const SharedWeightNet& net, const ParamVector& p,
                 std::span<const Example> batch, LossKind kind,
                 Activation act = Activation::kRelu);

// Central differences, one pair of batch evaluations per coordinate.
Eigen::VectorXd FiniteDiffGrad(const SharedWeightNet& net, const ParamVector& p,
                               std::span<const Example> batch, LossKind kind,
                               double step = 1e-5, Activation act = Activation::kRelu);

// Smallest |pre-activation| over internal nodes for the given inputs.
double MinAbsPreActivation(const SharedWeightNet& net, const ParamVector& p,
                           std::span<const Example> batch);

}  // namespace pathsgd

#endif  // PATHSGD_COMPUTE_H_
