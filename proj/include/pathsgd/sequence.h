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

#ifndef PATHSGD_SEQUENCE_H_
#define PATHSGD_SEQUENCE_H_

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/compute.h"

namespace pathsgd {

// Where a task reads the network: only the final step, or every step.
enum class Readout { kLastStep, kEveryStep };

struct SequenceFormat {
  int length = 1;
  int input_dim = 1;
  int output_dim = 1;
  Readout readout = Readout::kLastStep;
  LossKind loss = LossKind::kMse;

  int readout_steps() const { return readout == Readout::kLastStep ? 1 : length; }
  // 1-based time step of readout r.
  int readout_time(int r) const { return readout == Readout::kLastStep ? length : r + 1; }
  bool operator==(const SequenceFormat&) const = default;
};

// inputs: length x input_dim, row t holds x_{t+1}.
// targets (mse): readout_steps x output_dim. labels (xent): readout_steps.
struct SequenceExample {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  std::vector<int> labels;
};

struct Dataset {
  SequenceFormat format;
  std::vector<SequenceExample> examples;

  // Throws std::invalid_argument on the first malformed example.
  void Validate() const;
  size_t size() const { return examples.size(); }
};

// Flattens a sequence example for the reference engine on BuildRnn nets
// (time-major inputs and outputs). Also covers feedforward nets with
// length == 1.
Example ToGraphExample(const SequenceFormat& format, const SequenceExample& ex);

// Record-per-line text format (see README):
//   pathsgd-dataset 1
//   format <length> <input_dim> <output_dim> <last|every> <mse|softmax_xent> <count>
//   x <length*input_dim values> y <targets or labels>
// Values are written with 17 significant digits.
void WriteDataset(const Dataset& data, std::ostream& out);
Dataset ReadDataset(std::istream& in);

}  // namespace pathsgd

#endif  // PATHSGD_SEQUENCE_H_
