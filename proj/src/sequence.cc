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

#include "pathsgd/sequence.h"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pathsgd {

void Dataset::Validate() const {
  const SequenceFormat& f = format;
  if (f.length < 1 || f.input_dim < 1 || f.output_dim < 1) {
    throw std::invalid_argument("dataset format has non-positive dimensions");
  }
  const int reads = f.readout_steps();
  for (size_t i = 0; i < examples.size(); ++i) {
    const SequenceExample& ex = examples[i];
    const std::string where = "dataset example " + std::to_string(i) + ": ";
    if (ex.inputs.rows() != f.length || ex.inputs.cols() != f.input_dim) {
      throw std::invalid_argument(where + "input shape mismatch");
    }
    if (f.loss == LossKind::kMse) {
      if (ex.targets.rows() != reads || ex.targets.cols() != f.output_dim) {
        throw std::invalid_argument(where + "target shape mismatch");
      }
    } else {
      if (static_cast<int>(ex.labels.size()) != reads) {
        throw std::invalid_argument(where + "label count mismatch");
      }
      for (int label : ex.labels) {
        if (label < 0 || label >= f.output_dim) {
          throw std::invalid_argument(where + "label out of range");
        }
      }
    }
  }
}

Example ToGraphExample(const SequenceFormat& f, const SequenceExample& ex) {
  Example out;
  out.input.resize(static_cast<Eigen::Index>(f.length) * f.input_dim);
  for (int t = 0; t < f.length; ++t) {
    for (int k = 0; k < f.input_dim; ++k) out.input[t * f.input_dim + k] = ex.inputs(t, k);
  }
  std::vector<int> reads;
  for (int r = 0; r < f.readout_steps(); ++r) {
    const int t = f.readout_time(r) - 1;
    for (int o = 0; o < f.output_dim; ++o) reads.push_back(t * f.output_dim + o);
  }
  if (f.loss == LossKind::kMse) {
    Eigen::VectorXd values(static_cast<Eigen::Index>(reads.size()));
    for (int r = 0; r < f.readout_steps(); ++r) {
      for (int o = 0; o < f.output_dim; ++o) values[r * f.output_dim + o] = ex.targets(r, o);
    }
    out.target = Target::Regression(std::move(reads), std::move(values));
  } else {
    out.target = Target::Classes(std::move(reads), ex.labels);
  }
  return out;
}

namespace {

void PutNumber(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << ' ' << buf;
}

}  // namespace

void WriteDataset(const Dataset& data, std::ostream& out) {
  const SequenceFormat& f = data.format;
  out << "pathsgd-dataset 1\n";
  out << "format " << f.length << ' ' << f.input_dim << ' ' << f.output_dim << ' '
      << (f.readout == Readout::kLastStep ? "last" : "every") << ' '
      << (f.loss == LossKind::kMse ? "mse" : "softmax_xent") << ' ' << data.examples.size()
      << '\n';
  for (const SequenceExample& ex : data.examples) {
    out << 'x';
    for (int t = 0; t < f.length; ++t) {
      for (int k = 0; k < f.input_dim; ++k) PutNumber(out, ex.inputs(t, k));
    }
    out << " y";
    if (f.loss == LossKind::kMse) {
      for (Eigen::Index r = 0; r < ex.targets.rows(); ++r) {
        for (Eigen::Index o = 0; o < ex.targets.cols(); ++o) PutNumber(out, ex.targets(r, o));
      }
    } else {
      for (int label : ex.labels) out << ' ' << label;
    }
    out << '\n';
  }
}

Dataset ReadDataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "pathsgd-dataset 1") {
    throw std::runtime_error("ReadDataset: missing 'pathsgd-dataset 1' header");
  }
  Dataset data;
  SequenceFormat& f = data.format;
  size_t count = 0;
  {
    if (!std::getline(in, line)) throw std::runtime_error("ReadDataset: missing format line");
    std::istringstream fields(line);
    std::string tag, readout, loss;
    fields >> tag >> f.length >> f.input_dim >> f.output_dim >> readout >> loss >> count;
    if (fields.fail() || tag != "format") throw std::runtime_error("ReadDataset: bad format line");
    if (readout != "last" && readout != "every") {
      throw std::runtime_error("ReadDataset: bad readout '" + readout + "'");
    }
    f.readout = readout == "last" ? Readout::kLastStep : Readout::kEveryStep;
    f.loss = ParseLossKind(loss);
  }
  const int reads = f.readout_steps();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    if (tag != "x") throw std::runtime_error("ReadDataset: record must start with 'x'");
    SequenceExample ex;
    ex.inputs.resize(f.length, f.input_dim);
    for (int t = 0; t < f.length; ++t) {
      for (int k = 0; k < f.input_dim; ++k) fields >> ex.inputs(t, k);
    }
    fields >> tag;
    if (fields.fail() || tag != "y") throw std::runtime_error("ReadDataset: malformed record");
    if (f.loss == LossKind::kMse) {
      ex.targets.resize(reads, f.output_dim);
      for (int r = 0; r < reads; ++r) {
        for (int o = 0; o < f.output_dim; ++o) fields >> ex.targets(r, o);
      }
    } else {
      ex.labels.resize(reads);
      for (int& label : ex.labels) fields >> label;
    }
    if (fields.fail()) throw std::runtime_error("ReadDataset: truncated record");
    data.examples.push_back(std::move(ex));
  }
  if (data.examples.size() != count) {
    throw std::runtime_error("ReadDataset: header announces " + std::to_string(count) +
                             " records, found " + std::to_string(data.examples.size()));
  }
  data.Validate();
  return data;
}

}  // namespace pathsgd
