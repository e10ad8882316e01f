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

#include "pathsgd/compute.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathsgd {

Activation ParseActivation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

LossKind ParseLossKind(const std::string& name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "softmax_xent") return LossKind::kSoftmaxXent;
  throw std::invalid_argument("unknown loss '" + name + "'");
}

const char* ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

void CheckFinite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

namespace {

double Activate(double z, Activation act) {
  return act == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// d h / d pre, expressed through the stored pre-activation and value.
double ActivationSlope(double pre, double value, Activation act) {
  return act == Activation::kRelu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - value * value;
}

void CheckShapes(const SharedWeightNet& net, const ParamVector& p, const Eigen::VectorXd& x) {
  if (p.size() != net.num_params()) {
    throw std::invalid_argument("parameter vector has " + std::to_string(p.size()) +
                                " entries, net expects " + std::to_string(net.num_params()));
  }
  if (x.size() != static_cast<Eigen::Index>(net.inputs().size())) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " entries, net has " +
                                std::to_string(net.inputs().size()) + " input nodes");
  }
}

void CheckTarget(const Target& target, Eigen::Index num_outputs, LossKind kind) {
  for (int o : target.outputs) {
    if (o < 0 || o >= num_outputs) throw std::invalid_argument("target reads a missing output");
  }
  if (kind == LossKind::kMse) {
    if (target.values.size() != static_cast<Eigen::Index>(target.outputs.size())) {
      throw std::invalid_argument("mse target size does not match read outputs");
    }
  } else {
    if (target.labels.empty() || target.outputs.size() % target.labels.size() != 0) {
      throw std::invalid_argument("softmax target: outputs must split evenly into label groups");
    }
    const int classes = static_cast<int>(target.outputs.size() / target.labels.size());
    for (int label : target.labels) {
      if (label < 0 || label >= classes) {
        throw std::invalid_argument("softmax target: class " + std::to_string(label) +
                                    " out of range");
      }
    }
  }
}

// Fills dL/d(outputs) for one example and returns its loss.
double LossGradOutputs(const Eigen::VectorXd& outputs, const Target& target, LossKind kind,
                       Eigen::VectorXd* d_outputs) {
  CheckTarget(target, outputs.size(), kind);
  d_outputs->setZero(outputs.size());
  const int reads = static_cast<int>(target.outputs.size());
  if (kind == LossKind::kMse) {
    double loss = 0.0;
    for (int r = 0; r < reads; ++r) {
      const double diff = outputs[target.outputs[r]] - target.values[r];
      loss += diff * diff;
      (*d_outputs)[target.outputs[r]] += 2.0 * diff / reads;
    }
    return loss / reads;
  }
  const int groups = static_cast<int>(target.labels.size());
  const int classes = reads / groups;
  double loss = 0.0;
  Eigen::VectorXd logits(classes);
  for (int g = 0; g < groups; ++g) {
    for (int c = 0; c < classes; ++c) logits[c] = outputs[target.outputs[g * classes + c]];
    const double shift = logits.maxCoeff();
    const Eigen::VectorXd e = (logits.array() - shift).exp();
    const double z = e.sum();
    loss += std::log(z) + shift - logits[target.labels[g]];
    for (int c = 0; c < classes; ++c) {
      const double prob = e[c] / z - (c == target.labels[g] ? 1.0 : 0.0);
      (*d_outputs)[target.outputs[g * classes + c]] += prob / groups;
    }
  }
  return loss / groups;
}

}  // namespace

ForwardResult Forward(const SharedWeightNet& net, const ParamVector& p, const Eigen::VectorXd& x,
                      Activation act) {
  CheckShapes(net, p, x);
  CheckFinite(p, "parameter vector");
  const int n = net.num_nodes();
  ForwardResult r;
  r.trace.value.setZero(n);
  r.trace.pre.setZero(n);
  r.trace.active.assign(n, false);
  for (size_t k = 0; k < net.inputs().size(); ++k) {
    r.trace.value[net.inputs()[k]] = x[k];
    r.trace.pre[net.inputs()[k]] = x[k];
  }
  const auto& edges = net.edges();
  for (int v = 0; v < n; ++v) {
    const NodeKind kind = net.nodes()[v].kind;
    if (kind == NodeKind::kInput) continue;
    if (kind == NodeKind::kBias) {
      r.trace.value[v] = r.trace.pre[v] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (int e : net.in_edges(v)) sum += p[edges[e].param] * r.trace.value[edges[e].src];
    r.trace.pre[v] = sum;
    if (kind == NodeKind::kOutput) {
      r.trace.value[v] = sum;
    } else {
      r.trace.value[v] = Activate(sum, act);
      r.trace.active[v] = sum > 0.0;
    }
  }
  r.outputs.resize(static_cast<Eigen::Index>(net.outputs().size()));
  for (size_t o = 0; o < net.outputs().size(); ++o) r.outputs[o] = r.trace.value[net.outputs()[o]];
  return r;
}

Target Target::Regression(std::vector<int> outputs, Eigen::VectorXd values) {
  Target t;
  t.outputs = std::move(outputs);
  t.values = std::move(values);
  return t;
}

Target Target::Classes(std::vector<int> outputs, std::vector<int> labels) {
  Target t;
  t.outputs = std::move(outputs);
  t.labels = std::move(labels);
  return t;
}

double Mse(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target) {
  if (prediction.size() != target.size() || prediction.size() == 0) {
    throw std::invalid_argument("Mse: shape mismatch");
  }
  return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

double SoftmaxXent(const Eigen::VectorXd& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    throw std::invalid_argument("SoftmaxXent: class out of range");
  }
  const double shift = logits.maxCoeff();
  return std::log((logits.array() - shift).exp().sum()) + shift - logits[label];
}

double Loss(const Eigen::VectorXd& outputs, const Target& target, LossKind kind) {
  Eigen::VectorXd unused;
  return LossGradOutputs(outputs, target, kind, &unused);
}

LossGrad LossAndGrad(const SharedWeightNet& net, const ParamVector& p,
                     std::span<const Example> batch, LossKind kind, Activation act) {
  if (batch.empty()) throw std::invalid_argument("LossAndGrad: empty batch");
  LossGrad result;
  result.grad.setZero(net.num_params());
  const auto& edges = net.edges();
  Eigen::VectorXd d_outputs;
  Eigen::VectorXd d_value(net.num_nodes());
  for (const Example& ex : batch) {
    const ForwardResult fwd = Forward(net, p, ex.input, act);
    result.loss += LossGradOutputs(fwd.outputs, ex.target, kind, &d_outputs);
    d_value.setZero();
    for (size_t o = 0; o < net.outputs().size(); ++o) d_value[net.outputs()[o]] = d_outputs[o];
    for (int v = net.num_nodes() - 1; v >= 0; --v) {
      const NodeKind node_kind = net.nodes()[v].kind;
      if (node_kind == NodeKind::kInput || node_kind == NodeKind::kBias) continue;
      double d_pre = d_value[v];
      if (node_kind == NodeKind::kInternal) {
        d_pre *= ActivationSlope(fwd.trace.pre[v], fwd.trace.value[v], act);
      }
      if (d_pre == 0.0) continue;
      for (int e : net.in_edges(v)) {
        const Edge& edge = edges[e];
        result.grad[edge.param] += d_pre * fwd.trace.value[edge.src];
        d_value[edge.src] += d_pre * p[edge.param];
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  result.loss *= scale;
  result.grad *= scale;
  return result;
}

Eigen::VectorXd Grad(const SharedWeightNet& net, const ParamVector& p,
                     std::span<const Example> batch, LossKind kind, Activation act) {
  return LossAndGrad(net, p, batch, kind, act).grad;
}

double BatchLoss(const SharedWeightNet& net, const ParamVector& p,
                 std::span<const Example> batch, LossKind kind, Activation act) {
  if (batch.empty()) throw std::invalid_argument("BatchLoss: empty batch");
  double total = 0.0;
  for (const Example& ex : batch) total += Loss(Forward(net, p, ex.input, act).outputs, ex.target, kind);
  return total / static_cast<double>(batch.size());
}

Eigen::VectorXd FiniteDiffGrad(const SharedWeightNet& net, const ParamVector& p,
                               std::span<const Example> batch, LossKind kind, double step,
                               Activation act) {
  Eigen::VectorXd g(p.size());
  ParamVector probe = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    probe[i] = p[i] + step;
    const double up = BatchLoss(net, probe, batch, kind, act);
    probe[i] = p[i] - step;
    const double down = BatchLoss(net, probe, batch, kind, act);
    probe[i] = p[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double MinAbsPreActivation(const SharedWeightNet& net, const ParamVector& p,
                           std::span<const Example> batch) {
  double smallest = std::numeric_limits<double>::infinity();
  for (const Example& ex : batch) {
    const ForwardResult fwd = Forward(net, p, ex.input);
    for (int v = 0; v < net.num_nodes(); ++v) {
      if (net.nodes()[v].kind == NodeKind::kInternal) {
        smallest = std::min(smallest, std::abs(fwd.trace.pre[v]));
      }
    }
  }
  return smallest;
}

}  // namespace pathsgd
