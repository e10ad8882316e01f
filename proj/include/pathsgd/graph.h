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

#ifndef PATHSGD_GRAPH_H_
#define PATHSGD_GRAPH_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pathsgd {

enum class NodeKind { kInput, kInternal, kOutput, kBias };

const char* NodeKindName(NodeKind kind);

// A unit of the network. For unrolled RNNs (layer, unit, time) locate the
// node: layer 0 holds inputs, layers 1..d-1 hidden units and layer d the
// outputs; time is 1-based. Nodes of plain feedforward nets use time 0.
struct Node {
  NodeKind kind = NodeKind::kInternal;
  int layer = -1;
  int unit = -1;
  int time = 0;
};

// Directed edge src -> dst whose weight is p[param]. Parameter indices are
// 0-based.
struct Edge {
  int src = 0;
  int dst = 0;
  int param = 0;
};

// Shape of a (possibly deep) ReLU RNN. depth counts weight layers, so a
// single-hidden-layer RNN has depth 2 and hidden_dims.size() == depth - 1.
struct RnnSpec {
  int depth = 2;
  int input_dim = 1;
  std::vector<int> hidden_dims = {1};
  int output_dim = 1;
  int length = 1;
  bool bias = false;

  // Throws std::invalid_argument naming the violated constraint.
  void Validate() const;
  bool operator==(const RnnSpec&) const = default;
};

// Position of a weight matrix inside the flat parameter vector. Entries are
// stored row-major: W[j, k] lives at offset + j * cols + k.
struct MatrixBlock {
  int offset = -1;
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  int index(int row, int col) const { return offset + row * cols + col; }
};

// Parameter layout of an RNN: for each hidden layer W_in, W_rec (absent when
// length == 1) and an optional bias column, then W_out and its bias.
struct RnnLayout {
  std::vector<MatrixBlock> w_in;
  std::vector<MatrixBlock> w_rec;
  std::vector<MatrixBlock> b_hidden;
  MatrixBlock w_out;
  MatrixBlock b_out;
  int num_params = 0;

  bool has_recurrent() const { return !w_rec.empty() && w_rec[0].offset >= 0; }
};

RnnLayout MakeRnnLayout(const RnnSpec& spec);

// Feedforward network with shared weights: a DAG plus the edge-to-parameter
// map. Immutable once built. The constructor stores whatever it is given so
// that Validate() can report on malformed nets; the builders below only ever
// produce valid ones.
class SharedWeightNet {
 public:
  SharedWeightNet(std::vector<Node> nodes, std::vector<Edge> edges,
                  int num_params, std::optional<RnnSpec> rnn = std::nullopt);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_params() const { return num_params_; }

  // Input and output node ids, in node order.
  const std::vector<int>& inputs() const { return inputs_; }
  const std::vector<int>& outputs() const { return outputs_; }
  // Id of the bias node or -1.
  int bias_node() const { return bias_node_; }

  // Edge ids entering / leaving node v, and the edges sharing parameter i.
  std::span<const int> in_edges(int v) const;
  std::span<const int> out_edges(int v) const;
  std::span<const int> param_edges(int i) const;

  // Set when the net came from BuildRnn.
  const std::optional<RnnSpec>& rnn_spec() const { return rnn_; }

 private:
  static void BuildCsr(int n, const std::vector<std::pair<int, int>>& pairs,
                       std::vector<int>* start, std::vector<int>* items);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  int num_params_ = 0;
  std::optional<RnnSpec> rnn_;

  std::vector<int> inputs_;
  std::vector<int> outputs_;
  int bias_node_ = -1;
  std::vector<int> in_start_, in_items_;
  std::vector<int> out_start_, out_items_;
  std::vector<int> param_start_, param_items_;
};

// Time-unrolled RNN. Inputs and outputs are ordered time-major: x_1, x_2, ...
// each of input_dim coordinates. Hidden state at t = 0 is zero, so no
// recurrent edges enter t = 1 and T = 1 nets carry no recurrent parameters.
SharedWeightNet BuildRnn(const RnnSpec& spec);

// Fully connected ReLU net without sharing (pi is a bijection).
SharedWeightNet BuildFeedforward(const std::vector<int>& layer_dims);

// Edge ids in E_i. Throws std::out_of_range for i outside [0, m).
std::vector<int> EdgesForParam(const SharedWeightNet& net, int i);

struct ValidationReport {
  bool ok = true;
  std::string invariant;  // name of the first violated invariant
  std::string detail;

  explicit operator bool() const { return ok; }
};

// Checks, in order: "edge endpoint range", "param index range",
// "param coverage", "acyclicity", "topological order", "source in-degree",
// "output out-degree".
ValidationReport Validate(const SharedWeightNet& net);

// Line-oriented debug dump; see README for the grammar.
void WriteNetText(const SharedWeightNet& net, std::ostream& out);
SharedWeightNet ReadNetText(std::istream& in);

}  // namespace pathsgd

#endif  // PATHSGD_GRAPH_H_
