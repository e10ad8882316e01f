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

#ifndef PATHSGD_MODEL_H_
#define PATHSGD_MODEL_H_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/compute.h"
#include "pathsgd/graph.h"
#include "pathsgd/pathnorm.h"
#include "pathsgd/rnn_engine.h"
#include "pathsgd/sequence.h"

namespace pathsgd {

using Batch = std::span<const SequenceExample* const>;

// What the training loop needs from a network: loss, gradient, readouts and
// the Path-SGD preconditioner, all as pure functions of the parameters.
class Model {
 public:
  virtual ~Model() = default;

  virtual int num_params() const = 0;
  virtual const SequenceFormat& format() const = 0;
  virtual LossGrad LossAndGrad(const ParamVector& p, Batch batch) const = 0;
  virtual double Loss(const ParamVector& p, Batch batch) const = 0;
  virtual std::vector<Eigen::MatrixXd> Readouts(const ParamVector& p, Batch batch) const = 0;
  // k2 is left at zero in KappaMode::kFirstTerm.
  virtual KappaVector Kappa(const ParamVector& p, KappaMode mode) const = 0;
};

// Dense RNN fast path.
class RnnModel final : public Model {
 public:
  RnnModel(RnnSpec spec, SequenceFormat format, Activation act = Activation::kRelu);

  int num_params() const override { return engine_.num_params(); }
  const SequenceFormat& format() const override { return format_; }
  LossGrad LossAndGrad(const ParamVector& p, Batch batch) const override;
  double Loss(const ParamVector& p, Batch batch) const override;
  std::vector<Eigen::MatrixXd> Readouts(const ParamVector& p, Batch batch) const override;
  KappaVector Kappa(const ParamVector& p, KappaMode mode) const override;

  const RnnEngine& engine() const { return engine_; }

 private:
  RnnEngine engine_;
  SequenceFormat format_;
};

// Reference engine on an arbitrary net; inputs and outputs are the flattened
// time-major sequences (length 1 for plain feedforward nets).
class GraphModel final : public Model {
 public:
  GraphModel(SharedWeightNet net, SequenceFormat format, Activation act = Activation::kRelu);

  int num_params() const override { return net_.num_params(); }
  const SequenceFormat& format() const override { return format_; }
  LossGrad LossAndGrad(const ParamVector& p, Batch batch) const override;
  double Loss(const ParamVector& p, Batch batch) const override;
  std::vector<Eigen::MatrixXd> Readouts(const ParamVector& p, Batch batch) const override;
  KappaVector Kappa(const ParamVector& p, KappaMode mode) const override;

  const SharedWeightNet& net() const { return net_; }

 private:
  std::vector<Example> Convert(Batch batch) const;

  SharedWeightNet net_;
  SequenceFormat format_;
  Activation act_;
};

}  // namespace pathsgd

#endif  // PATHSGD_MODEL_H_
