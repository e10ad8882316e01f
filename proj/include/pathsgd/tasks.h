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

#ifndef PATHSGD_TASKS_H_
#define PATHSGD_TASKS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/sequence.h"

namespace pathsgd {

enum class MetricKind { kMse, kErrorRate, kBpc };
const char* MetricName(MetricKind kind);

// ---------------------------------------------------------------------------
// Addition problem.

struct AdditionExample {
  std::vector<double> values;  // U[0, 1]
  std::vector<int> mask;       // exactly two ones
  double target = 0.0;         // sum of the two masked values
};

// One marker uniformly in [0, T/2), the other uniformly in [T/2, T).
// Throws std::invalid_argument for T < 2.
std::vector<AdditionExample> GenAdditionExamples(int length, int count, std::mt19937_64& rng);

// Inputs are the 2-vectors (value_t, mask_t); the target is read from the
// single output unit at the last step.
Dataset AdditionDataset(const std::vector<AdditionExample>& examples);
Dataset GenAddition(int length, int count, std::mt19937_64& rng);

// Recovers the (values, mask, target) view of an addition dataset record.
AdditionExample AdditionView(const SequenceExample& ex);

// ---------------------------------------------------------------------------
// Sequential classification of small images.

struct ImageSet {
  int width = 0;
  int height = 0;
  int num_classes = 0;
  std::vector<Eigen::VectorXd> images;  // row-major, width * height pixels
  std::vector<int> labels;
};

// 8x8 digit glyphs (0-9) with random one-pixel shifts and pixel noise,
// intensities in [0, 1].
ImageSet SyntheticDigits(int count, std::mt19937_64& rng, double noise = 0.1);

// Text format: "images <width> <height> <classes> <count>" then one line per
// image: "<label> <pixels...>".
ImageSet LoadImageSet(const std::string& path);

// One pixel per time step in row-major order; logits read at the last step.
// The rng shuffles example order. Throws on inconsistent image sizes.
Dataset GenSeqClass(const ImageSet& images, std::mt19937_64& rng);

// Splits per class so each split keeps the label proportions.
void StratifiedSplit(const Dataset& data, double test_fraction, std::mt19937_64& rng,
                     Dataset* train, Dataset* test);

// ---------------------------------------------------------------------------
// Character-level language modelling.

struct CharLmCorpus {
  std::string alphabet;  // sorted distinct characters over all splits
  std::vector<int> train, valid, test;  // symbol ids
  int unroll = 50;

  int symbol(char c) const;
};

// Reads a text file and splits it contiguously by the given fractions.
// Throws std::runtime_error on I/O failure or an empty file.
CharLmCorpus LoadCharCorpus(const std::string& path, double train_fraction,
                            double valid_fraction, int unroll);
CharLmCorpus MakeCharCorpus(const std::string& text, double train_fraction,
                            double valid_fraction, int unroll);

// Non-overlapping windows of unroll + 1 symbols: one-hot inputs for the
// first unroll symbols and next-symbol labels at every step.
Dataset CharLmDataset(const CharLmCorpus& corpus, const std::vector<int>& stream);

// ---------------------------------------------------------------------------
// One-dimensional least squares, y = slope * x, for the single-edge net.
Dataset GenLinreg(int count, double slope, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Metrics. outputs[e] is readout_steps x output_dim for example e.

double MetricMse(const std::vector<Eigen::MatrixXd>& outputs,
                 const std::vector<Eigen::MatrixXd>& targets);
double MetricErrorRate(const std::vector<Eigen::MatrixXd>& outputs,
                       const std::vector<std::vector<int>>& labels);
// Mean over positions of -log2 softmax(outputs)[label].
double MetricBpc(const std::vector<Eigen::MatrixXd>& outputs,
                 const std::vector<std::vector<int>>& labels);

// Dispatches on kind using the dataset's own targets/labels.
double ComputeMetric(MetricKind kind, const std::vector<Eigen::MatrixXd>& outputs,
                     const Dataset& data, size_t first, size_t count);

// A task ready for training: datasets plus the metric to report.
struct TaskData {
  std::string name;
  Dataset train;
  Dataset test;
  MetricKind metric = MetricKind::kMse;
};

}  // namespace pathsgd

#endif  // PATHSGD_TASKS_H_
