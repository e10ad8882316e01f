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

// Path regularizer gamma^2 (sum over input->output paths of the product of
// squared weights) and the Path-SGD preconditioner
//
//   kappa_i = 1/2 d^2 gamma^2 / d p_i^2 = kappa1_i + kappa2_i,
//
// where kappa1 sums, over every edge e sharing p_i, the path products with e
// left out, and kappa2 collects paths that cross two or more edges sharing
// p_i. Closed forms are paired with enumeration and finite-difference
// oracles so every route can be checked against another.

#ifndef PATHSGD_PATHNORM_H_
#define PATHSGD_PATHNORM_H_

#include <string>

#include <Eigen/Core>

#include "pathsgd/compute.h"
#include "pathsgd/graph.h"

namespace pathsgd {

inline constexpr double kDefaultMaxPaths = 1e6;

enum class KappaMode { kFirstTerm, kBothTerms };

KappaMode ParseKappaMode(const std::string& name);  // "k1" | "k1_plus_k2"
const char* KappaModeName(KappaMode mode);

struct KappaVector {
  Eigen::VectorXd k1;
  Eigen::VectorXd k2;

  Eigen::VectorXd total() const { return k1 + k2; }
  Eigen::VectorXd select(KappaMode mode) const {
    return mode == KappaMode::kFirstTerm ? k1 : total();
  }
};

// gamma^2_v = sum_{u->v} gamma^2_u w_{u->v}^2 in topological order, with
// gamma^2 = 1 at input and bias nodes; returns the sum over outputs.
double GammaRecursive(const SharedWeightNet& net, const ParamVector& p);

// Number of input->output paths (inputs include the bias node), as a double
// so huge counts do not overflow.
double CountPaths(const SharedWeightNet& net);

// Explicit path enumeration. Throws std::length_error when the net has more
// than max_paths paths.
double GammaBruteforce(const SharedWeightNet& net, const ParamVector& p,
                       double max_paths = kDefaultMaxPaths);

// Half the central second difference of GammaRecursive per coordinate, with
// step rel_step * max(|p_i|, 1).
Eigen::VectorXd KappaFd(const SharedWeightNet& net, const ParamVector& p,
                        double rel_step = 1e-4);

// Forward pass of the squared-weight network (p~ = p^2) on the all-ones
// input and the backward sensitivities of g = sum of its outputs.
struct SquaredNetPass {
  Eigen::VectorXd value;      // h_v(p~); equals gamma^2_v(p)
  Eigen::VectorXd node_grad;  // dg/dh_v(p~)
  double g = 0.0;
};
SquaredNetPass RunSquaredNet(const SharedWeightNet& net, const ParamVector& p);

// kappa1 = grad_{p~} g(1): one forward and one backward pass.
Eigen::VectorXd Kappa1(const SharedWeightNet& net, const ParamVector& p);

// sum_{e in E_i} kappa_e with kappa_e from per-edge path enumeration.
Eigen::VectorXd KappaEdgesBruteforce(const SharedWeightNet& net, const ParamVector& p,
                                     double max_paths = kDefaultMaxPaths);

// For each parameter, twice the sum over ordered pairs of distinct edges
// e1 != e2 in E_i and paths through both of p_i^2 times the squared-weight
// product of the path without e1 and e2.
Eigen::VectorXd Kappa2Bruteforce(const SharedWeightNet& net, const ParamVector& p,
                                 double max_paths = kDefaultMaxPaths);

// Dense closed forms on the unrolled-RNN layout. kappa2 vanishes on W_in,
// W_out and biases; on W_rec^i it is
//   4 W'[j,k] sum_{n=0}^{T-3} (W'^n)[k,j] sum_{t=1}^{T-2-n} G_{t+n+2}[j] h_t[k]
// with W' the squared recurrent matrix, h_t the squared-net hidden values and
// G_t = dg/dh_t. Cost O(d T H^2 (T + H)).
Eigen::VectorXd Kappa1Rnn(const RnnSpec& spec, const ParamVector& p);
Eigen::VectorXd Kappa2Rnn(const RnnSpec& spec, const ParamVector& p);
// Net must come from BuildRnn; throws std::invalid_argument otherwise.
Eigen::VectorXd Kappa2Rnn(const SharedWeightNet& net, const ParamVector& p);

// Both terms on any net: RNN closed form when the net is an unrolled RNN,
// zero when pi is one-to-one, enumeration otherwise.
KappaVector ComputeKappa(const SharedWeightNet& net, const ParamVector& p);
KappaVector ComputeKappa(const RnnSpec& spec, const ParamVector& p, KappaMode mode);

// ||kappa2||_2 / ||kappa1||_2. Throws std::domain_error if kappa1 == 0.
double KappaRatio(const KappaVector& kappa);
double KappaRatio(const SharedWeightNet& net, const ParamVector& p);

}  // namespace pathsgd

#endif  // PATHSGD_PATHNORM_H_
