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

// Seeded property suites over random small instances. Each check returns the
// worst residual it saw; errors are normwise relative unless named absolute:
//   rel(a, b) = max_i |a_i - b_i| / max(|a|_inf, |b|_inf).

#ifndef PATHSGD_VERIFY_H_
#define PATHSGD_VERIFY_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pathsgd/compute.h"
#include "pathsgd/graph.h"
#include "pathsgd/pathnorm.h"

namespace pathsgd {

double RelErr(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double RelErr(double a, double b);

// ---------------------------------------------------------------------------
// Random instances.

struct RnnDraw {
  int max_layers = 2;  // hidden layers
  int max_hidden = 3;
  int max_length = 4;
  int max_input = 2;
  int max_output = 2;
  int min_length = 1;
  bool allow_bias = true;
};
RnnSpec RandomRnnSpec(std::mt19937_64& rng, const RnnDraw& draw = {});
std::vector<int> RandomFeedforwardDims(std::mt19937_64& rng, int max_layers = 4, int max_width = 3);
// DAG with at most 12 nodes and arbitrary sharing, including parameters that
// repeat along a single path.
SharedWeightNet RandomSharedDag(std::mt19937_64& rng);
Eigen::VectorXd RandomUniform(Eigen::Index n, double range, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Properties.

struct PropertyResult {
  std::string name;
  int instances = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  // Negative controls pass when worst exceeds the tolerance.
  bool expect_above = false;
  bool pass() const { return expect_above ? worst > tolerance : worst <= tolerance; }
};

PropertyResult CheckGammaOracle(int instances, std::uint64_t seed);
PropertyResult CheckSquaredNetGamma(int instances, std::uint64_t seed);
PropertyResult CheckKappa1Edges(int instances, std::uint64_t seed);
// kappa1 + kappa2_bruteforce against the second-difference oracle.
// fault_scale multiplies the closed form (1 in normal use).
PropertyResult CheckKappaDecomposition(int instances, std::uint64_t seed, double fault_scale = 1.0);
PropertyResult CheckKappaDecompositionDag(int instances, std::uint64_t seed);
PropertyResult CheckKappa2Rnn(int instances, std::uint64_t seed);
PropertyResult CheckFeedforwardKappa2(int instances, std::uint64_t seed);
PropertyResult CheckKappa1Dense(int instances, std::uint64_t seed);
PropertyResult CheckGradient(int instances, std::uint64_t seed);
PropertyResult CheckEngineAgreement(int instances, std::uint64_t seed);
PropertyResult CheckFunctionInvariance(int instances, std::uint64_t seed);
PropertyResult CheckRescalingGroup(int instances, std::uint64_t seed);
PropertyResult CheckKappaCovariance(int instances, std::uint64_t seed);
PropertyResult CheckUpdateInvariance(int instances, std::uint64_t seed, KappaMode mode);
// Plain SGD on the pinned instance; expect_above is set.
PropertyResult CheckSgdBreaksInvariance(std::uint64_t seed);

enum class VerifyLevel { kQuick, kFull };
std::vector<PropertyResult> RunVerifySuite(VerifyLevel level, std::uint64_t seed,
                                           double kappa_fault_scale = 1.0);
// One line per property; returns true when every property passed.
bool PrintReport(const std::vector<PropertyResult>& results, std::ostream& out);

}  // namespace pathsgd

#endif  // PATHSGD_VERIFY_H_
