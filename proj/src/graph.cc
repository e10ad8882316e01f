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

#include "pathsgd/graph.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pathsgd {

const char* NodeKindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kInput: return "input";
    case NodeKind::kInternal: return "internal";
    case NodeKind::kOutput: return "output";
    case NodeKind::kBias: return "bias";
  }
  return "?";
}

namespace {

NodeKind ParseNodeKind(const std::string& s) {
  if (s == "input") return NodeKind::kInput;
  if (s == "internal") return NodeKind::kInternal;
  if (s == "output") return NodeKind::kOutput;
  if (s == "bias") return NodeKind::kBias;
  throw std::invalid_argument("unknown node kind '" + s + "'");
}

}  // namespace

void RnnSpec::Validate() const {
  if (depth < 2) throw std::invalid_argument("RnnSpec: depth must be >= 2");
  if (length < 1) throw std::invalid_argument("RnnSpec: length must be >= 1");
  if (input_dim < 1) throw std::invalid_argument("RnnSpec: input_dim must be >= 1");
  if (output_dim < 1) throw std::invalid_argument("RnnSpec: output_dim must be >= 1");
  if (static_cast<int>(hidden_dims.size()) != depth - 1) {
    throw std::invalid_argument("RnnSpec: hidden_dims must have depth - 1 entries");
  }
  for (int h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("RnnSpec: hidden dims must be >= 1");
  }
}

RnnLayout MakeRnnLayout(const RnnSpec& spec) {
  spec.Validate();
  RnnLayout layout;
  int offset = 0;
  auto take = [&offset](int rows, int cols) {
    MatrixBlock b{offset, rows, cols};
    offset += rows * cols;
    return b;
  };
  int prev = spec.input_dim;
  for (int h : spec.hidden_dims) {
    layout.w_in.push_back(take(h, prev));
    layout.w_rec.push_back(spec.length > 1 ? take(h, h) : MatrixBlock{-1, h, h});
    layout.b_hidden.push_back(spec.bias ? take(h, 1) : MatrixBlock{-1, h, 1});
    prev = h;
  }
  layout.w_out = take(spec.output_dim, prev);
  layout.b_out = spec.bias ? take(spec.output_dim, 1) : MatrixBlock{-1, spec.output_dim, 1};
  layout.num_params = offset;
  return layout;
}

SharedWeightNet::SharedWeightNet(std::vector<Node> nodes, std::vector<Edge> edges,
                                 int num_params, std::optional<RnnSpec> rnn)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      num_params_(num_params),
      rnn_(std::move(rnn)) {
  const int n = num_nodes();
  for (int v = 0; v < n; ++v) {
    switch (nodes_[v].kind) {
      case NodeKind::kInput: inputs_.push_back(v); break;
      case NodeKind::kOutput: outputs_.push_back(v); break;
      case NodeKind::kBias:
        if (bias_node_ < 0) bias_node_ = v;
        break;
      case NodeKind::kInternal: break;
    }
  }
  // Out-of-range entries are skipped here and reported by Validate().
  std::vector<std::pair<int, int>> in_pairs, out_pairs, param_pairs;
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.dst >= 0 && edge.dst < n) in_pairs.emplace_back(edge.dst, e);
    if (edge.src >= 0 && edge.src < n) out_pairs.emplace_back(edge.src, e);
    if (edge.param >= 0 && edge.param < num_params_) param_pairs.emplace_back(edge.param, e);
  }
  BuildCsr(n, in_pairs, &in_start_, &in_items_);
  BuildCsr(n, out_pairs, &out_start_, &out_items_);
  BuildCsr(std::max(num_params_, 0), param_pairs, &param_start_, &param_items_);
}

void SharedWeightNet::BuildCsr(int n, const std::vector<std::pair<int, int>>& pairs,
                               std::vector<int>* start, std::vector<int>* items) {
  start->assign(n + 1, 0);
  for (const auto& [key, value] : pairs) ++(*start)[key + 1];
  for (int i = 0; i < n; ++i) (*start)[i + 1] += (*start)[i];
  items->assign(pairs.size(), 0);
  std::vector<int> fill(start->begin(), start->end() - 1);
  for (const auto& [key, value] : pairs) (*items)[fill[key]++] = value;
}

std::span<const int> SharedWeightNet::in_edges(int v) const {
  return {in_items_.data() + in_start_[v], in_items_.data() + in_start_[v + 1]};
}

std::span<const int> SharedWeightNet::out_edges(int v) const {
  return {out_items_.data() + out_start_[v], out_items_.data() + out_start_[v + 1]};
}

std::span<const int> SharedWeightNet::param_edges(int i) const {
  return {param_items_.data() + param_start_[i],
          param_items_.data() + param_start_[i + 1]};
}

SharedWeightNet BuildRnn(const RnnSpec& spec) {
  const RnnLayout layout = MakeRnnLayout(spec);
  const int d = spec.depth;
  const int T = spec.length;

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  int bias = -1;
  if (spec.bias) {
    bias = 0;
    nodes.push_back({NodeKind::kBias, -1, 0, 0});
  }
  // ids[t][layer] = id of unit 0 of that layer at time t (units contiguous).
  std::vector<std::vector<int>> ids(T + 1, std::vector<int>(d + 1, -1));
  auto dim = [&spec, d](int layer) {
    if (layer == 0) return spec.input_dim;
    if (layer == d) return spec.output_dim;
    return spec.hidden_dims[layer - 1];
  };
  for (int t = 1; t <= T; ++t) {
    for (int layer = 0; layer <= d; ++layer) {
      ids[t][layer] = static_cast<int>(nodes.size());
      const NodeKind kind = layer == 0 ? NodeKind::kInput
                            : layer == d ? NodeKind::kOutput
                                         : NodeKind::kInternal;
      for (int u = 0; u < dim(layer); ++u) nodes.push_back({kind, layer, u, t});
      if (layer == 0) continue;

      const MatrixBlock& w = layer == d ? layout.w_out : layout.w_in[layer - 1];
      for (int j = 0; j < dim(layer); ++j) {
        const int dst = ids[t][layer] + j;
        for (int k = 0; k < dim(layer - 1); ++k) {
          edges.push_back({ids[t][layer - 1] + k, dst, w.index(j, k)});
        }
        if (layer < d && t > 1) {
          const MatrixBlock& r = layout.w_rec[layer - 1];
          for (int k = 0; k < dim(layer); ++k) {
            edges.push_back({ids[t - 1][layer] + k, dst, r.index(j, k)});
          }
        }
        if (bias >= 0) {
          const MatrixBlock& b = layer == d ? layout.b_out : layout.b_hidden[layer - 1];
          edges.push_back({bias, dst, b.index(j, 0)});
        }
      }
    }
  }
  return SharedWeightNet(std::move(nodes), std::move(edges), layout.num_params, spec);
}

SharedWeightNet BuildFeedforward(const std::vector<int>& layer_dims) {
  if (layer_dims.size() < 2) {
    throw std::invalid_argument("BuildFeedforward: need at least two layers");
  }
  for (int n : layer_dims) {
    if (n < 1) throw std::invalid_argument("BuildFeedforward: layer sizes must be >= 1");
  }
  const int last = static_cast<int>(layer_dims.size()) - 1;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  int prev_start = -1;
  for (int layer = 0; layer <= last; ++layer) {
    const int start = static_cast<int>(nodes.size());
    const NodeKind kind = layer == 0 ? NodeKind::kInput
                          : layer == last ? NodeKind::kOutput
                                          : NodeKind::kInternal;
    for (int u = 0; u < layer_dims[layer]; ++u) nodes.push_back({kind, layer, u, 0});
    if (layer > 0) {
      for (int j = 0; j < layer_dims[layer]; ++j) {
        for (int k = 0; k < layer_dims[layer - 1]; ++k) {
          const int param = static_cast<int>(edges.size());
          edges.push_back({prev_start + k, start + j, param});
        }
      }
    }
    prev_start = start;
  }
  const int m = static_cast<int>(edges.size());
  return SharedWeightNet(std::move(nodes), std::move(edges), m);
}

std::vector<int> EdgesForParam(const SharedWeightNet& net, int i) {
  if (i < 0 || i >= net.num_params()) {
    throw std::out_of_range("EdgesForParam: parameter index " + std::to_string(i) +
                            " outside [0, " + std::to_string(net.num_params()) + ")");
  }
  auto span = net.param_edges(i);
  return {span.begin(), span.end()};
}

ValidationReport Validate(const SharedWeightNet& net) {
  auto fail = [](std::string invariant, std::string detail) {
    return ValidationReport{false, std::move(invariant), std::move(detail)};
  };
  const int n = net.num_nodes();
  const auto& edges = net.edges();

  for (int e = 0; e < net.num_edges(); ++e) {
    if (edges[e].src < 0 || edges[e].src >= n || edges[e].dst < 0 || edges[e].dst >= n) {
      return fail("edge endpoint range", "edge " + std::to_string(e));
    }
  }
  for (int e = 0; e < net.num_edges(); ++e) {
    if (edges[e].param < 0 || edges[e].param >= net.num_params()) {
      return fail("param index range", "edge " + std::to_string(e) + " maps to " +
                                           std::to_string(edges[e].param));
    }
  }
  for (int i = 0; i < net.num_params(); ++i) {
    if (net.param_edges(i).empty()) {
      return fail("param coverage", "parameter " + std::to_string(i) + " has no edge");
    }
  }

  // Kahn's algorithm.
  std::vector<int> indegree(n, 0);
  for (const Edge& e : edges) ++indegree[e.dst];
  std::vector<int> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  int visited = 0;
  while (!ready.empty()) {
    const int v = ready.back();
    ready.pop_back();
    ++visited;
    for (int e : net.out_edges(v)) {
      if (--indegree[edges[e].dst] == 0) ready.push_back(edges[e].dst);
    }
  }
  if (visited != n) return fail("acyclicity", "edge relation contains a cycle");

  for (int e = 0; e < net.num_edges(); ++e) {
    if (edges[e].src >= edges[e].dst) {
      return fail("topological order", "edge " + std::to_string(e) + " points backwards");
    }
  }
  for (int v = 0; v < n; ++v) {
    const NodeKind kind = net.nodes()[v].kind;
    if ((kind == NodeKind::kInput || kind == NodeKind::kBias) && !net.in_edges(v).empty()) {
      return fail("source in-degree", "node " + std::to_string(v) + " has incoming edges");
    }
    if (kind == NodeKind::kOutput && !net.out_edges(v).empty()) {
      return fail("output out-degree", "node " + std::to_string(v) + " has outgoing edges");
    }
  }
  return {};
}

void WriteNetText(const SharedWeightNet& net, std::ostream& out) {
  out << "pathsgd-net 1\n";
  out << "counts " << net.num_nodes() << ' ' << net.num_edges() << ' ' << net.num_params()
      << '\n';
  if (const auto& spec = net.rnn_spec()) {
    out << "rnn " << spec->depth << ' ' << spec->input_dim << ' ';
    for (size_t i = 0; i < spec->hidden_dims.size(); ++i) {
      out << (i ? "," : "") << spec->hidden_dims[i];
    }
    out << ' ' << spec->output_dim << ' ' << spec->length << ' ' << (spec->bias ? 1 : 0)
        << '\n';
  }
  for (int v = 0; v < net.num_nodes(); ++v) {
    const Node& node = net.nodes()[v];
    out << "node " << v << ' ' << NodeKindName(node.kind) << ' ' << node.layer << ' '
        << node.unit << ' ' << node.time << '\n';
  }
  for (const Edge& e : net.edges()) {
    out << "edge " << e.src << ' ' << e.dst << ' ' << e.param << '\n';
  }
}

SharedWeightNet ReadNetText(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "pathsgd-net 1") {
    throw std::runtime_error("ReadNetText: missing 'pathsgd-net 1' header");
  }
  int num_nodes = -1, num_edges = -1, num_params = -1;
  std::optional<RnnSpec> rnn;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    if (tag == "counts") {
      fields >> num_nodes >> num_edges >> num_params;
    } else if (tag == "rnn") {
      RnnSpec spec;
      std::string hidden;
      int bias = 0;
      fields >> spec.depth >> spec.input_dim >> hidden >> spec.output_dim >> spec.length >> bias;
      spec.bias = bias != 0;
      spec.hidden_dims.clear();
      std::istringstream hs(hidden);
      for (std::string h; std::getline(hs, h, ',');) spec.hidden_dims.push_back(std::stoi(h));
      rnn = spec;
    } else if (tag == "node") {
      int id = 0;
      std::string kind;
      Node node;
      fields >> id >> kind >> node.layer >> node.unit >> node.time;
      if (id != static_cast<int>(nodes.size())) {
        throw std::runtime_error("ReadNetText: node ids must be consecutive");
      }
      node.kind = ParseNodeKind(kind);
      nodes.push_back(node);
    } else if (tag == "edge") {
      Edge e;
      fields >> e.src >> e.dst >> e.param;
      edges.push_back(e);
    } else {
      throw std::runtime_error("ReadNetText: unknown record '" + tag + "'");
    }
    if (fields.fail()) throw std::runtime_error("ReadNetText: malformed line '" + line + "'");
  }
  if (num_nodes != static_cast<int>(nodes.size()) || num_edges != static_cast<int>(edges.size())) {
    throw std::runtime_error("ReadNetText: counts do not match records");
  }
  return SharedWeightNet(std::move(nodes), std::move(edges), num_params, rnn);
}

}  // namespace pathsgd
