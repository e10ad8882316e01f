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

#include "pathsgd/pathnorm.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pathsgd/rnn_engine.h"

namespace pathsgd {

KappaMode ParseKappaMode(const std::string& name) {
  if (name == "k1") return KappaMode::kFirstTerm;
  if (name == "k1_plus_k2") return KappaMode::kBothTerms;
  throw std::invalid_argument("unknown kappa mode '" + name + "'");
}

const char* KappaModeName(KappaMode mode) {
  return mode == KappaMode::kFirstTerm ? "k1" : "k1_plus_k2";
}

namespace {

bool IsSource(const Node& node) {
  return node.kind == NodeKind::kInput || node.kind == NodeKind::kBias;
}

void CheckParams(const SharedWeightNet& net, const ParamVector& p) {
  if (p.size() != net.num_params()) {
    throw std::invalid_argument("parameter vector length does not match the net");
  }
}

// Calls visit(path) for every input->output path, path being the edge ids in
// order. Depth-first, deterministic order.
template <typename Visit>
void ForEachPath(const SharedWeightNet& net, double max_paths, Visit&& visit) {
  const double count = CountPaths(net);
  if (count > max_paths) {
    throw std::length_error("path enumeration guard exceeded: " + std::to_string(count) +
                            " paths > " + std::to_string(max_paths));
  }
  std::vector<int> path;
  auto walk = [&](auto&& self, int v) -> void {
    if (net.nodes()[v].kind == NodeKind::kOutput) {
      visit(static_cast<const std::vector<int>&>(path));
      return;
    }
    for (int e : net.out_edges(v)) {
      path.push_back(e);
      self(self, net.edges()[e].dst);
      path.pop_back();
    }
  };
  for (int v = 0; v < net.num_nodes(); ++v) {
    if (IsSource(net.nodes()[v])) walk(walk, v);
  }
}

double SquaredWeight(const SharedWeightNet& net, const ParamVector& p, int edge) {
  const double w = p[net.edges()[edge].param];
  return w * w;
}

}  // namespace

double GammaRecursive(const SharedWeightNet& net, const ParamVector& p) {
  CheckParams(net, p);
  std::vector<double> gamma(net.num_nodes(), 0.0);
  double total = 0.0;
  for (int v = 0; v < net.num_nodes(); ++v) {
    const Node& node = net.nodes()[v];
    if (IsSource(node)) {
      gamma[v] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (int e : net.in_edges(v)) {
      const double w = p[net.edges()[e].param];
      sum += (w * w) * gamma[net.edges()[e].src];
    }
    gamma[v] = sum;
    if (node.kind == NodeKind::kOutput) total += sum;
  }
  return total;
}

double CountPaths(const SharedWeightNet& net) {
  std::vector<double> count(net.num_nodes(), 0.0);
  double total = 0.0;
  for (int v = 0; v < net.num_nodes(); ++v) {
    if (IsSource(net.nodes()[v])) {
      count[v] = 1.0;
      continue;
    }
    for (int e : net.in_edges(v)) count[v] += count[net.edges()[e].src];
    if (net.nodes()[v].kind == NodeKind::kOutput) total += count[v];
  }
  return total;
}

double GammaBruteforce(const SharedWeightNet& net, const ParamVector& p, double max_paths) {
  CheckParams(net, p);
  double total = 0.0;
  ForEachPath(net, max_paths, [&](const std::vector<int>& path) {
    double product = 1.0;
    for (int e : path) product *= SquaredWeight(net, p, e);
    total += product;
  });
  return total;
}

Eigen::VectorXd KappaFd(const SharedWeightNet& net, const ParamVector& p, double rel_step) {
  CheckParams(net, p);
  if (!(rel_step > 0.0)) throw std::invalid_argument("KappaFd: step must be positive");
  const double center = GammaRecursive(net, p);
  Eigen::VectorXd kappa(p.size());
  ParamVector probe = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double h = rel_step * std::max(std::abs(p[i]), 1.0);
    probe[i] = p[i] + h;
    const double up = GammaRecursive(net, probe);
    probe[i] = p[i] - h;
    const double down = GammaRecursive(net, probe);
    probe[i] = p[i];
    kappa[i] = 0.5 * (up - 2.0 * center + down) / (h * h);
  }
  return kappa;
}

SquaredNetPass RunSquaredNet(const SharedWeightNet& net, const ParamVector& p) {
  CheckParams(net, p);
  const ParamVector squared = p.cwiseProduct(p);
  const int n = net.num_nodes();
  const auto& edges = net.edges();
  SquaredNetPass pass;
  pass.value.setZero(n);
  pass.node_grad.setZero(n);
  // Same recursion as GammaRecursive. The ReLU stays in place; every
  // pre-activation is a sum of non-negative terms so it never clips.
  for (int v = 0; v < n; ++v) {
    const Node& node = net.nodes()[v];
    if (IsSource(node)) {
      pass.value[v] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (int e : net.in_edges(v)) sum += squared[edges[e].param] * pass.value[edges[e].src];
    pass.value[v] = node.kind == NodeKind::kOutput ? sum : std::max(sum, 0.0);
    if (node.kind == NodeKind::kOutput) pass.g += sum;
  }
  // Backward with slope 1 everywhere: the right derivative of the ReLU at
  // non-negative pre-activations, which keeps dg/dh a path sum even where a
  // node value is exactly zero.
  for (int v = n - 1; v >= 0; --v) {
    const Node& node = net.nodes()[v];
    if (node.kind == NodeKind::kOutput) pass.node_grad[v] = 1.0;
    if (IsSource(node)) continue;
    for (int e : net.in_edges(v)) {
      pass.node_grad[edges[e].src] += squared[edges[e].param] * pass.node_grad[v];
    }
  }
  return pass;
}

Eigen::VectorXd Kappa1(const SharedWeightNet& net, const ParamVector& p) {
  const SquaredNetPass pass = RunSquaredNet(net, p);
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(p.size());
  for (const Edge& e : net.edges()) kappa[e.param] += pass.node_grad[e.dst] * pass.value[e.src];
  return kappa;
}

Eigen::VectorXd KappaEdgesBruteforce(const SharedWeightNet& net, const ParamVector& p,
                                     double max_paths) {
  CheckParams(net, p);
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(p.size());
  ForEachPath(net, max_paths, [&](const std::vector<int>& path) {
    for (size_t a = 0; a < path.size(); ++a) {
      double product = 1.0;
      for (size_t c = 0; c < path.size(); ++c) {
        if (c != a) product *= SquaredWeight(net, p, path[c]);
      }
      kappa[net.edges()[path[a]].param] += product;
    }
  });
  return kappa;
}

Eigen::VectorXd Kappa2Bruteforce(const SharedWeightNet& net, const ParamVector& p,
                                 double max_paths) {
  CheckParams(net, p);
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(p.size());
  ForEachPath(net, max_paths, [&](const std::vector<int>& path) {
    for (size_t a = 0; a < path.size(); ++a) {
      const int param = net.edges()[path[a]].param;
      for (size_t b = 0; b < path.size(); ++b) {
        if (b == a || net.edges()[path[b]].param != param) continue;
        double product = p[param] * p[param];
        for (size_t c = 0; c < path.size(); ++c) {
          if (c != a && c != b) product *= SquaredWeight(net, p, path[c]);
        }
        kappa[param] += 2.0 * product;
      }
    }
  });
  return kappa;
}

namespace {

// Squared-net values h[i][t] (i = 0 is the all-ones input) and
// sensitivities G[i][t] = dg/dh^i_t for an unrolled RNN, t = 1..T.
struct SquaredRnnPass {
  std::vector<std::vector<Eigen::VectorXd>> h;
  std::vector<std::vector<Eigen::VectorXd>> grad;
  std::vector<Eigen::MatrixXd> w_in, w_rec;
  std::vector<Eigen::VectorXd> b;
  Eigen::MatrixXd w_out;
};

SquaredRnnPass RunSquaredRnn(const RnnSpec& spec, const RnnLayout& layout, const ParamVector& p) {
  if (p.size() != layout.num_params) {
    throw std::invalid_argument("parameter vector length does not match the RNN layout");
  }
  const int d = spec.depth;
  const int T = spec.length;
  SquaredRnnPass s;
  for (int i = 1; i < d; ++i) {
    s.w_in.push_back(BlockView(p, layout.w_in[i - 1]).array().square().matrix());
    s.w_rec.push_back(layout.has_recurrent()
                          ? Eigen::MatrixXd(BlockView(p, layout.w_rec[i - 1]).array().square())
                          : Eigen::MatrixXd::Zero(spec.hidden_dims[i - 1], spec.hidden_dims[i - 1]));
    s.b.push_back(spec.bias ? Eigen::VectorXd(BlockView(p, layout.b_hidden[i - 1]).col(0).array().square())
                            : Eigen::VectorXd::Zero(spec.hidden_dims[i - 1]));
  }
  s.w_out = BlockView(p, layout.w_out).array().square().matrix();

  s.h.assign(d, std::vector<Eigen::VectorXd>(T + 2));
  s.grad.assign(d, std::vector<Eigen::VectorXd>(T + 2));
  for (int t = 1; t <= T; ++t) s.h[0][t] = Eigen::VectorXd::Ones(spec.input_dim);
  for (int i = 1; i < d; ++i) {
    s.h[i][0] = Eigen::VectorXd::Zero(spec.hidden_dims[i - 1]);
    s.grad[i][T + 1] = Eigen::VectorXd::Zero(spec.hidden_dims[i - 1]);
  }
  for (int t = 1; t <= T; ++t) {
    for (int i = 1; i < d; ++i) {
      Eigen::VectorXd z = s.w_in[i - 1] * s.h[i - 1][t] + s.b[i - 1];
      if (t > 1) z.noalias() += s.w_rec[i - 1] * s.h[i][t - 1];
      s.h[i][t] = z.cwiseMax(0.0);
    }
  }
  const Eigen::VectorXd top = s.w_out.transpose() * Eigen::VectorXd::Ones(spec.output_dim);
  for (int t = T; t >= 1; --t) {
    for (int i = d - 1; i >= 1; --i) {
      Eigen::VectorXd g = i == d - 1 ? top : Eigen::VectorXd(s.w_in[i].transpose() * s.grad[i + 1][t]);
      if (t < T) g.noalias() += s.w_rec[i - 1].transpose() * s.grad[i][t + 1];
      s.grad[i][t] = std::move(g);
    }
  }
  return s;
}

}  // namespace

Eigen::VectorXd Kappa1Rnn(const RnnSpec& spec, const ParamVector& p) {
  const RnnLayout layout = MakeRnnLayout(spec);
  const SquaredRnnPass s = RunSquaredRnn(spec, layout, p);
  const int d = spec.depth;
  const int T = spec.length;
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(layout.num_params);
  for (int i = 1; i < d; ++i) {
    auto k_in = BlockView(kappa, layout.w_in[i - 1]);
    for (int t = 1; t <= T; ++t) k_in.noalias() += s.grad[i][t] * s.h[i - 1][t].transpose();
    if (layout.has_recurrent()) {
      auto k_rec = BlockView(kappa, layout.w_rec[i - 1]);
      for (int t = 2; t <= T; ++t) k_rec.noalias() += s.grad[i][t] * s.h[i][t - 1].transpose();
    }
    if (spec.bias) {
      auto k_b = BlockView(kappa, layout.b_hidden[i - 1]);
      for (int t = 1; t <= T; ++t) k_b.col(0) += s.grad[i][t];
    }
  }
  auto k_out = BlockView(kappa, layout.w_out);
  for (int t = 1; t <= T; ++t) {
    k_out.rowwise() += s.h[d - 1][t].transpose();
  }
  if (spec.bias) BlockView(kappa, layout.b_out).setConstant(static_cast<double>(T));
  return kappa;
}

Eigen::VectorXd Kappa2Rnn(const RnnSpec& spec, const ParamVector& p) {
  const RnnLayout layout = MakeRnnLayout(spec);
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(layout.num_params);
  const int T = spec.length;
  if (T < 3) return kappa;  // no path crosses two recurrent edges
  const SquaredRnnPass s = RunSquaredRnn(spec, layout, p);
  for (int i = 1; i < spec.depth; ++i) {
    const int H = spec.hidden_dims[i - 1];
    const Eigen::MatrixXd& w = s.w_rec[i - 1];
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(H, H);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(H, H);
    for (int n = 0; n <= T - 3; ++n) {
      Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(H, H);
      for (int t = 1; t <= T - 2 - n; ++t) {
        inner.noalias() += s.grad[i][t + n + 2] * s.h[i][t].transpose();
      }
      acc += power.transpose().cwiseProduct(inner);
      power = power * w;
    }
    BlockView(kappa, layout.w_rec[i - 1]) = 4.0 * w.cwiseProduct(acc);
  }
  return kappa;
}

Eigen::VectorXd Kappa2Rnn(const SharedWeightNet& net, const ParamVector& p) {
  if (!net.rnn_spec()) throw std::invalid_argument("Kappa2Rnn: net is not an unrolled RNN");
  CheckParams(net, p);
  return Kappa2Rnn(*net.rnn_spec(), p);
}

KappaVector ComputeKappa(const SharedWeightNet& net, const ParamVector& p) {
  KappaVector kappa;
  kappa.k1 = Kappa1(net, p);
  if (net.rnn_spec()) {
    kappa.k2 = Kappa2Rnn(*net.rnn_spec(), p);
    return kappa;
  }
  bool shared = false;
  for (int i = 0; i < net.num_params() && !shared; ++i) shared = net.param_edges(i).size() > 1;
  kappa.k2 = shared ? Kappa2Bruteforce(net, p) : Eigen::VectorXd::Zero(p.size());
  return kappa;
}

KappaVector ComputeKappa(const RnnSpec& spec, const ParamVector& p, KappaMode mode) {
  KappaVector kappa;
  kappa.k1 = Kappa1Rnn(spec, p);
  kappa.k2 = mode == KappaMode::kBothTerms ? Kappa2Rnn(spec, p)
                                           : Eigen::VectorXd::Zero(kappa.k1.size());
  return kappa;
}

double KappaRatio(const KappaVector& kappa) {
  const double denom = kappa.k1.norm();
  if (denom == 0.0) throw std::domain_error("KappaRatio: kappa1 is identically zero");
  return kappa.k2.norm() / denom;
}

double KappaRatio(const SharedWeightNet& net, const ParamVector& p) {
  return KappaRatio(ComputeKappa(net, p));
}

}  // namespace pathsgd
