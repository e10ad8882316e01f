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

#include "pathsgd/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "pathsgd/invariance.h"
#include "pathsgd/model.h"
#include "pathsgd/optim.h"

namespace pathsgd {

double RelErr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  const double diff = (a - b).lpNorm<Eigen::Infinity>();
  if (diff == 0.0) return 0.0;
  if (!std::isfinite(diff)) return std::numeric_limits<double>::infinity();
  return diff / std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
}

double RelErr(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

namespace {

int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Thresholds shared by the gradient and invariance checks.
constexpr double kKinkMargin = 1e-4;
constexpr double kLogTen = 2.302585092994046;

std::vector<Example> RandomBatch(const SharedWeightNet& net, const SequenceFormat& f, int count,
                                 std::mt19937_64& rng) {
  std::vector<Example> batch;
  for (int n = 0; n < count; ++n) {
    SequenceExample ex;
    ex.inputs = Eigen::MatrixXd::NullaryExpr(f.length, f.input_dim, [&] {
      return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    });
    if (f.loss == LossKind::kMse) {
      ex.targets = Eigen::MatrixXd::NullaryExpr(f.readout_steps(), f.output_dim, [&] {
        return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      });
    } else {
      for (int r = 0; r < f.readout_steps(); ++r) ex.labels.push_back(UniformInt(rng, 0, f.output_dim - 1));
    }
    batch.push_back(ToGraphExample(f, ex));
  }
  (void)net;
  return batch;
}

SequenceFormat FormatFor(const RnnSpec& spec, Readout readout, LossKind loss) {
  return {spec.length, spec.input_dim, spec.output_dim, readout, loss};
}

SharedWeightNet RandomOracleNet(std::mt19937_64& rng, int kind) {
  switch (kind % 3) {
    case 0: return BuildRnn(RandomRnnSpec(rng));
    case 1: return BuildFeedforward(RandomFeedforwardDims(rng));
    default: return RandomSharedDag(rng);
  }
}

}  // namespace

RnnSpec RandomRnnSpec(std::mt19937_64& rng, const RnnDraw& draw) {
  RnnSpec spec;
  const int layers = UniformInt(rng, 1, draw.max_layers);
  spec.depth = layers + 1;
  spec.input_dim = UniformInt(rng, 1, draw.max_input);
  spec.hidden_dims.clear();
  for (int i = 0; i < layers; ++i) spec.hidden_dims.push_back(UniformInt(rng, 1, draw.max_hidden));
  spec.output_dim = UniformInt(rng, 1, draw.max_output);
  spec.length = UniformInt(rng, draw.min_length, draw.max_length);
  spec.bias = draw.allow_bias && UniformInt(rng, 0, 1) == 1;
  return spec;
}

std::vector<int> RandomFeedforwardDims(std::mt19937_64& rng, int max_layers, int max_width) {
  std::vector<int> dims(UniformInt(rng, 2, max_layers));
  for (int& d : dims) d = UniformInt(rng, 1, max_width);
  return dims;
}

SharedWeightNet RandomSharedDag(std::mt19937_64& rng) {
  const int n_in = UniformInt(rng, 1, 3);
  const int n_hidden = UniformInt(rng, 2, 6);
  const int n_out = UniformInt(rng, 1, 2);
  std::vector<Node> nodes;
  for (int u = 0; u < n_in; ++u) nodes.push_back({NodeKind::kInput, 0, u, 0});
  for (int u = 0; u < n_hidden; ++u) nodes.push_back({NodeKind::kInternal, 1, u, 0});
  for (int u = 0; u < n_out; ++u) nodes.push_back({NodeKind::kOutput, 2, u, 0});
  std::bernoulli_distribution coin(0.6);
  std::vector<std::pair<int, int>> links;
  for (int v = n_in; v < static_cast<int>(nodes.size()); ++v) {
    const bool is_out = v >= n_in + n_hidden;
    const int preds = is_out ? n_in + n_hidden : v;
    std::vector<int> chosen;
    for (int u = 0; u < preds; ++u) {
      if (coin(rng)) chosen.push_back(u);
    }
    if (chosen.empty()) chosen.push_back(UniformInt(rng, 0, preds - 1));
    for (int u : chosen) links.emplace_back(u, v);
  }
  const int e = static_cast<int>(links.size());
  const int m = UniformInt(rng, std::max(1, e / 2), e);
  std::vector<int> order(e);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges(e);
  for (int k = 0; k < e; ++k) {
    const int idx = order[k];
    edges[idx] = {links[idx].first, links[idx].second, k < m ? k : UniformInt(rng, 0, m - 1)};
  }
  return SharedWeightNet(std::move(nodes), std::move(edges), m);
}

Eigen::VectorXd RandomUniform(Eigen::Index n, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-range, range);
  return Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
}

PropertyResult CheckGammaOracle(int instances, std::uint64_t seed) {
  PropertyResult r{"gamma_recursive_vs_bruteforce", instances, 0.0, 1e-10};
  std::mt19937_64 rng = DeriveRng(seed, 101);
  for (int n = 0; n < instances; ++n) {
    const SharedWeightNet net = RandomOracleNet(rng, n);
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    r.worst = std::max(r.worst, RelErr(GammaRecursive(net, p), GammaBruteforce(net, p)));
  }
  return r;
}

PropertyResult CheckSquaredNetGamma(int instances, std::uint64_t seed) {
  PropertyResult r{"squared_net_output_equals_gamma", instances, 0.0, 1e-14};
  std::mt19937_64 rng = DeriveRng(seed, 102);
  for (int n = 0; n < instances; ++n) {
    const SharedWeightNet net = RandomOracleNet(rng, n);
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    const SquaredNetPass pass = RunSquaredNet(net, p);
    if ((pass.value.array() < 0.0).any()) r.worst = std::numeric_limits<double>::infinity();
    r.worst = std::max(r.worst, RelErr(pass.g, GammaRecursive(net, p)));
  }
  return r;
}

PropertyResult CheckKappa1Edges(int instances, std::uint64_t seed) {
  PropertyResult r{"kappa1_vs_edge_enumeration", instances, 0.0, 1e-10};
  std::mt19937_64 rng = DeriveRng(seed, 103);
  for (int n = 0; n < instances; ++n) {
    const SharedWeightNet net = RandomOracleNet(rng, n);
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    r.worst = std::max(r.worst, RelErr(Kappa1(net, p), KappaEdgesBruteforce(net, p)));
  }
  return r;
}

PropertyResult CheckKappaDecomposition(int instances, std::uint64_t seed, double fault_scale) {
  PropertyResult r{"kappa1_plus_kappa2_vs_second_difference", instances, 0.0, 1e-4};
  std::mt19937_64 rng = DeriveRng(seed, 104);
  for (int n = 0; n < instances; ++n) {
    const SharedWeightNet net = BuildRnn(RandomRnnSpec(rng));
    const ParamVector p = RandomUniform(net.num_params(), 0.5, rng);
    const Eigen::VectorXd closed = fault_scale * (Kappa1(net, p) + Kappa2Bruteforce(net, p));
    r.worst = std::max(r.worst, RelErr(closed, KappaFd(net, p)));
  }
  return r;
}

PropertyResult CheckKappaDecompositionDag(int instances, std::uint64_t seed) {
  PropertyResult r{"kappa_decomposition_on_shared_dags", instances, 0.0, 1e-4};
  std::mt19937_64 rng = DeriveRng(seed, 105);
  for (int n = 0; n < instances; ++n) {
    const SharedWeightNet net = RandomSharedDag(rng);
    const ParamVector p = RandomUniform(net.num_params(), 0.5, rng);
    const Eigen::VectorXd closed = Kappa1(net, p) + Kappa2Bruteforce(net, p);
    r.worst = std::max(r.worst, RelErr(closed, KappaFd(net, p)));
  }
  return r;
}

PropertyResult CheckKappa2Rnn(int instances, std::uint64_t seed) {
  PropertyResult r{"kappa2_matrix_form_vs_bruteforce", instances, 0.0, 1e-10};
  std::mt19937_64 rng = DeriveRng(seed, 106);
  for (int n = 0; n < instances; ++n) {
    const SharedWeightNet net = BuildRnn(RandomRnnSpec(rng));
    const ParamVector p = RandomUniform(net.num_params(), 0.5, rng);
    r.worst = std::max(r.worst, RelErr(Kappa2Rnn(net, p), Kappa2Bruteforce(net, p)));
  }
  return r;
}

PropertyResult CheckFeedforwardKappa2(int instances, std::uint64_t seed) {
  PropertyResult r{"feedforward_kappa2_is_zero", instances, 0.0, 0.0};
  std::mt19937_64 rng = DeriveRng(seed, 107);
  for (int n = 0; n < instances; ++n) {
    const SharedWeightNet net = BuildFeedforward(RandomFeedforwardDims(rng));
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    r.worst = std::max({r.worst, Kappa2Bruteforce(net, p).lpNorm<Eigen::Infinity>(),
                        ComputeKappa(net, p).k2.lpNorm<Eigen::Infinity>()});
  }
  return r;
}

PropertyResult CheckKappa1Dense(int instances, std::uint64_t seed) {
  PropertyResult r{"kappa1_dense_vs_graph", instances, 0.0, 1e-12};
  std::mt19937_64 rng = DeriveRng(seed, 108);
  RnnDraw draw;
  draw.max_hidden = 4;
  draw.max_length = 6;
  for (int n = 0; n < instances; ++n) {
    const RnnSpec spec = RandomRnnSpec(rng, draw);
    const SharedWeightNet net = BuildRnn(spec);
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    r.worst = std::max(r.worst, RelErr(Kappa1Rnn(spec, p), Kappa1(net, p)));
  }
  return r;
}

PropertyResult CheckGradient(int instances, std::uint64_t seed) {
  PropertyResult r{"gradient_vs_central_differences", instances, 0.0, 1e-5};
  std::mt19937_64 rng = DeriveRng(seed, 109);
  int done = 0;
  while (done < instances) {
    const RnnSpec spec = RandomRnnSpec(rng);
    const SharedWeightNet net = BuildRnn(spec);
    const LossKind loss = UniformInt(rng, 0, 1) ? LossKind::kMse : LossKind::kSoftmaxXent;
    const Readout readout = UniformInt(rng, 0, 1) ? Readout::kLastStep : Readout::kEveryStep;
    const Activation act = done % 5 == 4 ? Activation::kTanh : Activation::kRelu;
    const std::vector<Example> batch = RandomBatch(net, FormatFor(spec, readout, loss), 3, rng);
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    if (act == Activation::kRelu && MinAbsPreActivation(net, p, batch) < kKinkMargin) continue;
    const Eigen::VectorXd g = Grad(net, p, batch, loss, act);
    const Eigen::VectorXd fd = FiniteDiffGrad(net, p, batch, loss, 1e-5, act);
    r.worst = std::max(r.worst, RelErr(g, fd));
    ++done;
  }
  return r;
}

PropertyResult CheckEngineAgreement(int instances, std::uint64_t seed) {
  PropertyResult r{"dense_engine_vs_graph_engine", instances, 0.0, 1e-12};
  std::mt19937_64 rng = DeriveRng(seed, 110);
  RnnDraw draw;
  draw.max_hidden = 4;
  draw.max_length = 5;
  draw.max_input = 3;
  draw.max_output = 3;
  for (int n = 0; n < instances; ++n) {
    const RnnSpec spec = RandomRnnSpec(rng, draw);
    const LossKind loss = n % 2 ? LossKind::kMse : LossKind::kSoftmaxXent;
    const Readout readout = (n / 2) % 2 ? Readout::kLastStep : Readout::kEveryStep;
    const Activation act = n % 7 == 6 ? Activation::kTanh : Activation::kRelu;
    const SequenceFormat f = FormatFor(spec, readout, loss);
    std::vector<SequenceExample> data(4);
    for (auto& ex : data) {
      ex.inputs = RandomUniform(static_cast<Eigen::Index>(f.length) * f.input_dim, 1.0, rng)
                      .reshaped(f.length, f.input_dim);
      if (loss == LossKind::kMse) {
        ex.targets = RandomUniform(static_cast<Eigen::Index>(f.readout_steps()) * f.output_dim, 1.0, rng)
                         .reshaped(f.readout_steps(), f.output_dim);
      } else {
        for (int s = 0; s < f.readout_steps(); ++s) ex.labels.push_back(UniformInt(rng, 0, f.output_dim - 1));
      }
    }
    std::vector<const SequenceExample*> batch;
    for (const auto& ex : data) batch.push_back(&ex);
    const RnnModel dense(spec, f, act);
    const GraphModel graph(BuildRnn(spec), f, act);
    const ParamVector p = RandomUniform(dense.num_params(), 1.0, rng);
    const LossGrad a = dense.LossAndGrad(p, batch);
    const LossGrad b = graph.LossAndGrad(p, batch);
    r.worst = std::max({r.worst, RelErr(a.loss, b.loss), RelErr(a.grad, b.grad)});
  }
  return r;
}

PropertyResult CheckFunctionInvariance(int instances, std::uint64_t seed) {
  PropertyResult r{"rescaling_preserves_function_abs", instances, 0.0, 1e-10};
  std::mt19937_64 rng = DeriveRng(seed, 111);
  RnnDraw draw;
  draw.max_layers = 3;
  draw.max_hidden = 4;
  draw.max_length = 5;
  draw.max_input = 3;
  for (int n = 0; n < instances; ++n) {
    const RnnSpec spec = RandomRnnSpec(rng, draw);
    const SharedWeightNet net = BuildRnn(spec);
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    const NodeScaling alpha = RandomRescaling(spec, rng, kLogTen);
    const ParamVector q = ApplyRescaling(spec, p, alpha);
    const Eigen::VectorXd x = RandomUniform(static_cast<Eigen::Index>(net.inputs().size()), 1.0, rng);
    const Eigen::VectorXd diff = Forward(net, p, x).outputs - Forward(net, q, x).outputs;
    r.worst = std::max(r.worst, diff.lpNorm<Eigen::Infinity>());
  }
  return r;
}

PropertyResult CheckRescalingGroup(int instances, std::uint64_t seed) {
  PropertyResult r{"rescaling_composition_and_inverse", instances, 0.0, 1e-12};
  std::mt19937_64 rng = DeriveRng(seed, 112);
  for (int n = 0; n < instances; ++n) {
    const RnnSpec spec = RandomRnnSpec(rng);
    const ParamVector p = RandomUniform(MakeRnnLayout(spec).num_params, 1.0, rng);
    const NodeScaling a = RandomRescaling(spec, rng, kLogTen);
    const NodeScaling b = RandomRescaling(spec, rng, kLogTen);
    const ParamVector twice = ApplyRescaling(spec, ApplyRescaling(spec, p, a), b);
    const ParamVector once = ApplyRescaling(spec, p, a.Then(b));
    const ParamVector back = ApplyRescaling(spec, ApplyRescaling(spec, p, a), a.Inverse());
    r.worst = std::max({r.worst, RelErr(twice, once), RelErr(back, p)});
  }
  return r;
}

PropertyResult CheckKappaCovariance(int instances, std::uint64_t seed) {
  PropertyResult r{"kappa_rescaling_covariance", instances, 0.0, 1e-10};
  std::mt19937_64 rng = DeriveRng(seed, 113);
  for (int n = 0; n < instances; ++n) {
    const RnnSpec spec = RandomRnnSpec(rng);
    const SharedWeightNet net = BuildRnn(spec);
    const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
    const NodeScaling alpha = RandomRescaling(spec, rng, kLogTen);
    const std::vector<double> scale = EdgeMultipliers(net, NodeMultipliers(net, alpha));
    if (!IsFeasible(net, scale)) {
      r.worst = std::numeric_limits<double>::infinity();
      continue;
    }
    const KappaVector before = ComputeKappa(net, p);
    const KappaVector after = ComputeKappa(net, ApplyRescaling(spec, p, alpha));
    Eigen::VectorXd factor(p.size());
    for (int i = 0; i < net.num_params(); ++i) {
      const double s = scale[net.param_edges(i)[0]];
      factor[i] = 1.0 / (s * s);
    }
    r.worst = std::max({r.worst, RelErr(after.k1, before.k1.cwiseProduct(factor)),
                        RelErr(after.k2, before.k2.cwiseProduct(factor)),
                        RelErr(after.total(), before.total().cwiseProduct(factor))});
  }
  return r;
}

namespace {

// Deviation between the functions after one step from p and from T_alpha(p).
// Returns NaN when the instance is rejected (kink or floored kappa).
double UpdateDeviation(std::mt19937_64& rng, OptimizerKind kind, KappaMode mode, double lr,
                       double log_range) {
  RnnDraw draw;
  draw.min_length = 2;
  const RnnSpec spec = RandomRnnSpec(rng, draw);
  const SharedWeightNet net = BuildRnn(spec);
  const SequenceFormat f = FormatFor(spec, Readout::kEveryStep, LossKind::kMse);
  const std::vector<Example> batch = RandomBatch(net, f, 4, rng);
  const std::vector<Example> probe = RandomBatch(net, f, 4, rng);
  const ParamVector p = RandomUniform(net.num_params(), 1.0, rng);
  const NodeScaling alpha = RandomRescaling(spec, rng, log_range);
  const ParamVector q = ApplyRescaling(spec, p, alpha);
  if (MinAbsPreActivation(net, p, batch) < kKinkMargin) return std::nan("");

  auto step = [&](const ParamVector& w) {
    const Eigen::VectorXd g = Grad(net, w, batch, LossKind::kMse);
    if (kind == OptimizerKind::kSgd) return SgdStep(w, g, lr);
    return PathSgdStep(net, w, g, lr, mode);
  };
  const KappaVector kp = ComputeKappa(net, p);
  const KappaVector kq = ComputeKappa(net, q);
  if (kind != OptimizerKind::kSgd &&
      (kp.select(mode).minCoeff() <= 1e-7 || kq.select(mode).minCoeff() <= 1e-7)) {
    return std::nan("");
  }
  const ParamVector p_next = step(p);
  const ParamVector q_next = step(q);
  if (MinAbsPreActivation(net, p_next, probe) < kKinkMargin) return std::nan("");
  double worst = 0.0;
  for (const Example& ex : probe) {
    const Eigen::VectorXd d = Forward(net, p_next, ex.input).outputs - Forward(net, q_next, ex.input).outputs;
    worst = std::max(worst, d.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace

PropertyResult CheckUpdateInvariance(int instances, std::uint64_t seed, KappaMode mode) {
  PropertyResult r{std::string("path_sgd_update_invariance_") + KappaModeName(mode) + "_abs",
                   instances, 0.0, 1e-8};
  std::mt19937_64 rng = DeriveRng(seed, mode == KappaMode::kFirstTerm ? 114 : 115);
  int done = 0;
  while (done < instances) {
    const double d = UpdateDeviation(rng, OptimizerKind::kPathSgd, mode, 0.01, kLogTen);
    if (std::isnan(d)) continue;
    r.worst = std::max(r.worst, d);
    ++done;
  }
  return r;
}

PropertyResult CheckSgdBreaksInvariance(std::uint64_t seed) {
  PropertyResult r{"sgd_update_not_invariant_abs", 1, 0.0, 1e-3, true};
  std::mt19937_64 rng = DeriveRng(seed, 116);
  double d = std::nan("");
  while (std::isnan(d)) d = UpdateDeviation(rng, OptimizerKind::kSgd, KappaMode::kFirstTerm, 0.1, kLogTen);
  r.worst = d;
  return r;
}

std::vector<PropertyResult> RunVerifySuite(VerifyLevel level, std::uint64_t seed,
                                           double kappa_fault_scale) {
  const bool full = level == VerifyLevel::kFull;
  const int n = full ? 100 : 20;
  std::vector<PropertyResult> out;
  out.push_back(CheckGammaOracle(n, seed));
  out.push_back(CheckSquaredNetGamma(n, seed));
  out.push_back(CheckKappa1Edges(n, seed));
  out.push_back(CheckKappaDecomposition(n, seed, kappa_fault_scale));
  out.push_back(CheckFeedforwardKappa2(n, seed));
  out.push_back(CheckKappa1Dense(n, seed));
  out.push_back(CheckGradient(n, seed));
  out.push_back(CheckEngineAgreement(n, seed));
  out.push_back(CheckFunctionInvariance(n, seed));
  out.push_back(CheckRescalingGroup(n, seed));
  out.push_back(CheckKappaCovariance(n, seed));
  out.push_back(CheckUpdateInvariance(n, seed, KappaMode::kFirstTerm));
  out.push_back(CheckUpdateInvariance(n, seed, KappaMode::kBothTerms));
  if (full) {
    out.push_back(CheckKappaDecompositionDag(n, seed));
    out.push_back(CheckKappa2Rnn(n, seed));
    out.push_back(CheckSgdBreaksInvariance(seed));
  }
  return out;
}

bool PrintReport(const std::vector<PropertyResult>& results, std::ostream& out) {
  bool all = true;
  for (const PropertyResult& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%s %-44s instances=%-4d worst=%.3e %s %.1e\n",
                  r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.instances, r.worst,
                  r.expect_above ? "min" : "tol", r.tolerance);
    out << line;
    all = all && r.pass();
  }
  return all;
}

}  // namespace pathsgd
