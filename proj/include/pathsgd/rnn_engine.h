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

#ifndef PATHSGD_RNN_ENGINE_H_
#define PATHSGD_RNN_ENGINE_H_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/compute.h"
#include "pathsgd/graph.h"
#include "pathsgd/sequence.h"

namespace pathsgd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMatrix> BlockView(const Eigen::VectorXd& p, const MatrixBlock& b) {
  return {p.data() + b.offset, b.rows, b.cols};
}
inline Eigen::Map<RowMatrix> BlockView(Eigen::VectorXd& p, const MatrixBlock& b) {
  return {p.data() + b.offset, b.rows, b.cols};
}

// Batched dense forward/backward for the unrolled RNN described by an
// RnnSpec, using the parameter layout of MakeRnnLayout. Computes the same
// function and gradient as the graph engine on BuildRnn(spec).
class RnnEngine {
 public:
  explicit RnnEngine(RnnSpec spec, Activation act = Activation::kRelu);

  const RnnSpec& spec() const { return spec_; }
  const RnnLayout& layout() const { return layout_; }
  Activation activation() const { return act_; }
  int num_params() const { return layout_.num_params; }

  // Mean loss over the batch and its gradient.
  LossGrad LossAndGrad(const ParamVector& p, std::span<const SequenceExample* const> batch,
                       const SequenceFormat& format) const;
  double Loss(const ParamVector& p, std::span<const SequenceExample* const> batch,
              const SequenceFormat& format) const;

  // Network outputs at the format's readout steps, one
  // readout_steps x output_dim matrix per example.
  std::vector<Eigen::MatrixXd> Readouts(const ParamVector& p,
                                        std::span<const SequenceExample* const> batch,
                                        const SequenceFormat& format) const;

 private:
  struct Workspace {
    // h[i][t]: layer i (0 = input) at time t (0 = initial zero state),
    // one column per example.
    std::vector<std::vector<Eigen::MatrixXd>> h;
    std::vector<Eigen::MatrixXd> y;  // y[t], t = 1..T
  };

  void CheckFormat(const ParamVector& p, const SequenceFormat& format) const;
  void RunForward(const ParamVector& p, std::span<const SequenceExample* const> batch,
                  Workspace* ws) const;
  // Loss of the batch; fills dL/dy when d_y is non-null.
  double ReadoutLoss(const Workspace& ws, std::span<const SequenceExample* const> batch,
                     const SequenceFormat& format, std::vector<Eigen::MatrixXd>* d_y) const;

  RnnSpec spec_;
  RnnLayout layout_;
  Activation act_;
};

}  // namespace pathsgd

#endif  // PATHSGD_RNN_ENGINE_H_
