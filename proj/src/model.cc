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

#include "pathsgd/model.h"

#include <stdexcept>

namespace pathsgd {

RnnModel::RnnModel(RnnSpec spec, SequenceFormat format, Activation act)
    : engine_(std::move(spec), act), format_(format) {
  const RnnSpec& s = engine_.spec();
  if (format_.length != s.length || format_.input_dim != s.input_dim ||
      format_.output_dim != s.output_dim) {
    throw std::invalid_argument("RnnModel: task format does not match the RNN spec");
  }
}

LossGrad RnnModel::LossAndGrad(const ParamVector& p, Batch batch) const {
  return engine_.LossAndGrad(p, batch, format_);
}

double RnnModel::Loss(const ParamVector& p, Batch batch) const {
  return engine_.Loss(p, batch, format_);
}

std::vector<Eigen::MatrixXd> RnnModel::Readouts(const ParamVector& p, Batch batch) const {
  return engine_.Readouts(p, batch, format_);
}

KappaVector RnnModel::Kappa(const ParamVector& p, KappaMode mode) const {
  return ComputeKappa(engine_.spec(), p, mode);
}

GraphModel::GraphModel(SharedWeightNet net, SequenceFormat format, Activation act)
    : net_(std::move(net)), format_(format), act_(act) {
  const auto ins = static_cast<long>(net_.inputs().size());
  const auto outs = static_cast<long>(net_.outputs().size());
  if (ins != static_cast<long>(format_.length) * format_.input_dim ||
      outs != static_cast<long>(format_.length) * format_.output_dim) {
    throw std::invalid_argument("GraphModel: task format does not match the net's inputs/outputs");
  }
}

std::vector<Example> GraphModel::Convert(Batch batch) const {
  std::vector<Example> out;
  out.reserve(batch.size());
  for (const SequenceExample* ex : batch) out.push_back(ToGraphExample(format_, *ex));
  return out;
}

LossGrad GraphModel::LossAndGrad(const ParamVector& p, Batch batch) const {
  return pathsgd::LossAndGrad(net_, p, Convert(batch), format_.loss, act_);
}

double GraphModel::Loss(const ParamVector& p, Batch batch) const {
  return BatchLoss(net_, p, Convert(batch), format_.loss, act_);
}

std::vector<Eigen::MatrixXd> GraphModel::Readouts(const ParamVector& p, Batch batch) const {
  std::vector<Eigen::MatrixXd> out;
  for (const SequenceExample* ex : batch) {
    const Eigen::VectorXd y = Forward(net_, p, ToGraphExample(format_, *ex).input, act_).outputs;
    Eigen::MatrixXd r(format_.readout_steps(), format_.output_dim);
    for (int s = 0; s < format_.readout_steps(); ++s) {
      const int t = format_.readout_time(s) - 1;
      for (int o = 0; o < format_.output_dim; ++o) r(s, o) = y[t * format_.output_dim + o];
    }
    out.push_back(std::move(r));
  }
  return out;
}

KappaVector GraphModel::Kappa(const ParamVector& p, KappaMode mode) const {
  if (mode == KappaMode::kBothTerms) return ComputeKappa(net_, p);
  KappaVector kappa;
  kappa.k1 = Kappa1(net_, p);
  kappa.k2 = Eigen::VectorXd::Zero(p.size());
  return kappa;
}

}  // namespace pathsgd
