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

#include "pathsgd/tasks.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pathsgd {

const char* MetricName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kMse: return "mse";
    case MetricKind::kErrorRate: return "error_rate";
    case MetricKind::kBpc: return "bpc";
  }
  return "?";
}

std::vector<AdditionExample> GenAdditionExamples(int length, int count, std::mt19937_64& rng) {
  if (length < 2) throw std::invalid_argument("addition task needs length >= 2");
  if (count < 0) throw std::invalid_argument("addition task: negative example count");
  const int half = length / 2;
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::uniform_int_distribution<int> first(0, half - 1);
  std::uniform_int_distribution<int> second(half, length - 1);
  std::vector<AdditionExample> out(count);
  for (AdditionExample& ex : out) {
    ex.values.resize(length);
    for (double& v : ex.values) v = value(rng);
    ex.mask.assign(length, 0);
    const int a = first(rng);
    const int b = second(rng);
    ex.mask[a] = ex.mask[b] = 1;
    ex.target = ex.values[a] + ex.values[b];
  }
  return out;
}

Dataset AdditionDataset(const std::vector<AdditionExample>& examples) {
  Dataset data;
  const int length = examples.empty() ? 2 : static_cast<int>(examples[0].values.size());
  data.format = {length, 2, 1, Readout::kLastStep, LossKind::kMse};
  for (const AdditionExample& ex : examples) {
    SequenceExample s;
    s.inputs.resize(length, 2);
    for (int t = 0; t < length; ++t) {
      s.inputs(t, 0) = ex.values[t];
      s.inputs(t, 1) = ex.mask[t];
    }
    s.targets.resize(1, 1);
    s.targets(0, 0) = ex.target;
    data.examples.push_back(std::move(s));
  }
  return data;
}

Dataset GenAddition(int length, int count, std::mt19937_64& rng) {
  return AdditionDataset(GenAdditionExamples(length, count, rng));
}

AdditionExample AdditionView(const SequenceExample& ex) {
  if (ex.inputs.cols() != 2 || ex.targets.size() != 1) {
    throw std::invalid_argument("AdditionView: not an addition record");
  }
  AdditionExample view;
  for (Eigen::Index t = 0; t < ex.inputs.rows(); ++t) {
    view.values.push_back(ex.inputs(t, 0));
    view.mask.push_back(static_cast<int>(ex.inputs(t, 1)));
  }
  view.target = ex.targets(0, 0);
  return view;
}

namespace {

constexpr std::array<std::array<const char*, 8>, 10> kGlyphs = {{
    {"..####..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", "..####.."},
    {"...##...", "..###...", "...##...", "...##...", "...##...", "...##...", "...##...", "..####.."},
    {"..####..", ".#....#.", "......#.", ".....#..", "....#...", "...#....", "..#.....", ".######."},
    {"..####..", ".#....#.", "......#.", "...###..", "......#.", "......#.", ".#....#.", "..####.."},
    {".....#..", "....##..", "...#.#..", "..#..#..", ".#...#..", ".######.", ".....#..", ".....#.."},
    {".######.", ".#......", ".#......", ".#####..", "......#.", "......#.", ".#....#.", "..####.."},
    {"..####..", ".#......", ".#......", ".#####..", ".#....#.", ".#....#.", ".#....#.", "..####.."},
    {".######.", "......#.", ".....#..", "....#...", "...#....", "...#....", "...#....", "...#...."},
    {"..####..", ".#....#.", ".#....#.", "..####..", ".#....#.", ".#....#.", ".#....#.", "..####.."},
    {"..####..", ".#....#.", ".#....#.", "..#####.", "......#.", "......#.", ".....#..", "..###..."},
}};

}  // namespace

ImageSet SyntheticDigits(int count, std::mt19937_64& rng, double noise) {
  ImageSet set;
  set.width = set.height = 8;
  set.num_classes = 10;
  std::uniform_int_distribution<int> label_dist(0, 9);
  std::uniform_int_distribution<int> shift(-1, 1);
  std::uniform_real_distribution<double> jitter(-noise, noise);
  for (int n = 0; n < count; ++n) {
    const int label = label_dist(rng);
    const int dx = shift(rng);
    const int dy = shift(rng);
    Eigen::VectorXd img(64);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        const int sr = r - dy;
        const int sc = c - dx;
        const bool on = sr >= 0 && sr < 8 && sc >= 0 && sc < 8 && kGlyphs[label][sr][sc] == '#';
        img[r * 8 + c] = std::clamp((on ? 1.0 : 0.0) + jitter(rng), 0.0, 1.0);
      }
    }
    set.images.push_back(std::move(img));
    set.labels.push_back(label);
  }
  return set;
}

ImageSet LoadImageSet(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open image set '" + path + "'");
  ImageSet set;
  std::string tag;
  size_t count = 0;
  in >> tag >> set.width >> set.height >> set.num_classes >> count;
  if (!in || tag != "images") throw std::runtime_error("image set: bad header in '" + path + "'");
  for (size_t n = 0; n < count; ++n) {
    int label = 0;
    in >> label;
    Eigen::VectorXd img(static_cast<Eigen::Index>(set.width) * set.height);
    for (Eigen::Index k = 0; k < img.size(); ++k) in >> img[k];
    if (!in) throw std::runtime_error("image set: truncated record in '" + path + "'");
    set.images.push_back(std::move(img));
    set.labels.push_back(label);
  }
  return set;
}

Dataset GenSeqClass(const ImageSet& images, std::mt19937_64& rng) {
  if (images.width < 1 || images.height < 1) throw std::invalid_argument("image set is empty");
  if (images.width != images.height) throw std::invalid_argument("images must be square");
  if (images.images.size() != images.labels.size()) {
    throw std::invalid_argument("image set: label count differs from image count");
  }
  const int length = images.width * images.height;
  Dataset data;
  data.format = {length, 1, images.num_classes, Readout::kLastStep, LossKind::kSoftmaxXent};
  std::vector<size_t> order(images.images.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (size_t n : order) {
    if (images.images[n].size() != length) {
      throw std::invalid_argument("image set: inconsistent image sizes");
    }
    SequenceExample ex;
    ex.inputs = images.images[n];  // one pixel per step, row-major
    ex.labels = {images.labels[n]};
    data.examples.push_back(std::move(ex));
  }
  data.Validate();
  return data;
}

void StratifiedSplit(const Dataset& data, double test_fraction, std::mt19937_64& rng,
                     Dataset* train, Dataset* test) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw std::invalid_argument("StratifiedSplit: fraction outside [0, 1]");
  }
  train->format = test->format = data.format;
  train->examples.clear();
  test->examples.clear();
  std::vector<std::vector<size_t>> by_class(data.format.output_dim);
  for (size_t n = 0; n < data.examples.size(); ++n) {
    by_class.at(data.examples[n].labels.at(0)).push_back(n);
  }
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<size_t>(std::llround(test_fraction * members.size()));
    for (size_t k = 0; k < members.size(); ++k) {
      (k < n_test ? test : train)->examples.push_back(data.examples[members[k]]);
    }
  }
}

int CharLmCorpus::symbol(char c) const {
  const auto pos = alphabet.find(c);
  if (pos == std::string::npos) throw std::out_of_range("character outside the alphabet");
  return static_cast<int>(pos);
}

CharLmCorpus MakeCharCorpus(const std::string& text, double train_fraction,
                            double valid_fraction, int unroll) {
  if (text.empty()) throw std::runtime_error("character corpus is empty");
  if (train_fraction <= 0.0 || valid_fraction < 0.0 || train_fraction + valid_fraction > 1.0) {
    throw std::invalid_argument("corpus split fractions must be positive and sum to <= 1");
  }
  if (unroll < 1) throw std::invalid_argument("unroll length must be >= 1");
  CharLmCorpus corpus;
  corpus.unroll = unroll;
  const std::set<char> distinct(text.begin(), text.end());
  corpus.alphabet.assign(distinct.begin(), distinct.end());
  std::array<int, 256> index{};
  for (size_t k = 0; k < corpus.alphabet.size(); ++k) {
    index[static_cast<unsigned char>(corpus.alphabet[k])] = static_cast<int>(k);
  }
  const size_t n = text.size();
  const auto n_train = static_cast<size_t>(std::floor(train_fraction * n + 1e-9));
  const auto n_valid = static_cast<size_t>(std::floor(valid_fraction * n + 1e-9));
  for (size_t k = 0; k < n; ++k) {
    const int id = index[static_cast<unsigned char>(text[k])];
    if (k < n_train) {
      corpus.train.push_back(id);
    } else if (k < n_train + n_valid) {
      corpus.valid.push_back(id);
    } else {
      corpus.test.push_back(id);
    }
  }
  return corpus;
}

CharLmCorpus LoadCharCorpus(const std::string& path, double train_fraction,
                            double valid_fraction, int unroll) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return MakeCharCorpus(buf.str(), train_fraction, valid_fraction, unroll);
}

Dataset CharLmDataset(const CharLmCorpus& corpus, const std::vector<int>& stream) {
  const int T = corpus.unroll;
  const int A = static_cast<int>(corpus.alphabet.size());
  Dataset data;
  data.format = {T, A, A, Readout::kEveryStep, LossKind::kSoftmaxXent};
  for (size_t start = 0; start + T < stream.size(); start += T) {
    SequenceExample ex;
    ex.inputs = Eigen::MatrixXd::Zero(T, A);
    ex.labels.resize(T);
    for (int t = 0; t < T; ++t) {
      ex.inputs(t, stream[start + t]) = 1.0;
      ex.labels[t] = stream[start + t + 1];
    }
    data.examples.push_back(std::move(ex));
  }
  return data;
}

Dataset GenLinreg(int count, double slope, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(-1.0, 1.0);
  Dataset data;
  data.format = {1, 1, 1, Readout::kLastStep, LossKind::kMse};
  for (int n = 0; n < count; ++n) {
    SequenceExample ex;
    ex.inputs.resize(1, 1);
    ex.inputs(0, 0) = x(rng);
    ex.targets.resize(1, 1);
    ex.targets(0, 0) = slope * ex.inputs(0, 0);
    data.examples.push_back(std::move(ex));
  }
  return data;
}

double MetricMse(const std::vector<Eigen::MatrixXd>& outputs,
                 const std::vector<Eigen::MatrixXd>& targets) {
  if (outputs.size() != targets.size() || outputs.empty()) {
    throw std::invalid_argument("MetricMse: shape mismatch");
  }
  double total = 0.0;
  for (size_t e = 0; e < outputs.size(); ++e) {
    if (outputs[e].rows() != targets[e].rows() || outputs[e].cols() != targets[e].cols()) {
      throw std::invalid_argument("MetricMse: shape mismatch");
    }
    total += (outputs[e] - targets[e]).squaredNorm() / static_cast<double>(outputs[e].size());
  }
  return total / static_cast<double>(outputs.size());
}

namespace {

template <typename PerPosition>
double MeanOverPositions(const std::vector<Eigen::MatrixXd>& outputs,
                         const std::vector<std::vector<int>>& labels, PerPosition&& f) {
  if (outputs.size() != labels.size() || outputs.empty()) {
    throw std::invalid_argument("metric: shape mismatch");
  }
  double total = 0.0;
  size_t positions = 0;
  for (size_t e = 0; e < outputs.size(); ++e) {
    if (outputs[e].rows() != static_cast<Eigen::Index>(labels[e].size())) {
      throw std::invalid_argument("metric: shape mismatch");
    }
    for (Eigen::Index r = 0; r < outputs[e].rows(); ++r) {
      const int label = labels[e][r];
      if (label < 0 || label >= outputs[e].cols()) {
        throw std::invalid_argument("metric: label out of range");
      }
      total += f(outputs[e].row(r), label);
      ++positions;
    }
  }
  return total / static_cast<double>(positions);
}

}  // namespace

double MetricErrorRate(const std::vector<Eigen::MatrixXd>& outputs,
                       const std::vector<std::vector<int>>& labels) {
  return MeanOverPositions(outputs, labels, [](const auto& row, int label) {
    Eigen::Index best = 0;
    row.maxCoeff(&best);
    return best == label ? 0.0 : 1.0;
  });
}

double MetricBpc(const std::vector<Eigen::MatrixXd>& outputs,
                 const std::vector<std::vector<int>>& labels) {
  return MeanOverPositions(outputs, labels, [](const auto& row, int label) {
    const double shift = row.maxCoeff();
    const double log_z = std::log((row.array() - shift).exp().sum()) + shift;
    return (log_z - row(label)) / std::log(2.0);
  });
}

double ComputeMetric(MetricKind kind, const std::vector<Eigen::MatrixXd>& outputs,
                     const Dataset& data, size_t first, size_t count) {
  if (first + count > data.examples.size() || outputs.size() != count) {
    throw std::invalid_argument("ComputeMetric: range mismatch");
  }
  if (kind == MetricKind::kMse) {
    std::vector<Eigen::MatrixXd> targets;
    for (size_t e = 0; e < count; ++e) targets.push_back(data.examples[first + e].targets);
    return MetricMse(outputs, targets);
  }
  std::vector<std::vector<int>> labels;
  for (size_t e = 0; e < count; ++e) labels.push_back(data.examples[first + e].labels);
  return kind == MetricKind::kErrorRate ? MetricErrorRate(outputs, labels)
                                        : MetricBpc(outputs, labels);
}

}  // namespace pathsgd
