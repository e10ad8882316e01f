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

#ifndef PATHSGD_CHECKPOINT_H_
#define PATHSGD_CHECKPOINT_H_

#include <iosfwd>
#include <optional>
#include <string>

#include "pathsgd/compute.h"
#include "pathsgd/graph.h"
#include "pathsgd/optim.h"

namespace pathsgd {

// Text checkpoint. Header lines
//   pathsgd-checkpoint 1
//   params <m>
//   spec <depth> <input> <h1,h2,..> <output> <T> <bias 0|1>   or   spec none
//   optimizer <kind> <kappa_mode> <lr> <kappa_floor> <kappa_every> <b1> <b2> <eps>
//   step <n> adam_t <n> kappa_step <n>
// then the vectors "p", "m", "v" and "kappa", each as "<name> <size>"
// followed by one %.17g value per line. Round trips are bit-exact.
struct Checkpoint {
  std::optional<RnnSpec> spec;
  ParamVector params;
  OptimizerState state;
};

void WriteCheckpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint ReadCheckpoint(std::istream& in);

// File variants; the writer goes through a temporary and a rename.
void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace pathsgd

#endif  // PATHSGD_CHECKPOINT_H_
