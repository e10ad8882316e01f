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

#include "pathsgd/checkpoint.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pathsgd {

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void WriteVector(std::ostream& out, const char* name, const Eigen::VectorXd& v) {
  out << name << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << Num(v[i]) << '\n';
}

[[noreturn]] void Fail(const std::string& what) {
  throw std::runtime_error("checkpoint: " + what);
}

void Expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) Fail("expected '" + word + "', got '" + got + "'");
}

double ReadNumber(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) Fail("truncated value list");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (*end != '\0') Fail("bad number '" + tok + "'");
  return v;
}

Eigen::VectorXd ReadVector(std::istream& in, const char* name) {
  Expect(in, name);
  long n = -1;
  if (!(in >> n) || n < 0) Fail(std::string("bad size for ") + name);
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i) v[i] = ReadNumber(in);
  return v;
}

}  // namespace

void WriteCheckpoint(const Checkpoint& ckpt, std::ostream& out) {
  const OptimizerState& s = ckpt.state;
  const OptimizerConfig& c = s.config;
  out << "pathsgd-checkpoint 1\n";
  out << "params " << ckpt.params.size() << '\n';
  if (ckpt.spec) {
    const RnnSpec& r = *ckpt.spec;
    out << "spec " << r.depth << ' ' << r.input_dim << ' ';
    for (size_t i = 0; i < r.hidden_dims.size(); ++i) out << (i ? "," : "") << r.hidden_dims[i];
    out << ' ' << r.output_dim << ' ' << r.length << ' ' << (r.bias ? 1 : 0) << '\n';
  } else {
    out << "spec none\n";
  }
  out << "optimizer " << OptimizerKindName(c.kind) << ' ' << KappaModeName(c.kappa_mode) << ' '
      << Num(c.lr) << ' ' << Num(c.kappa_floor) << ' ' << c.kappa_every << ' ' << Num(c.beta1)
      << ' ' << Num(c.beta2) << ' ' << Num(c.adam_eps) << '\n';
  out << "step " << s.step << " adam_t " << s.adam_t << " kappa_step " << s.kappa_step << '\n';
  WriteVector(out, "p", ckpt.params);
  WriteVector(out, "m", s.m);
  WriteVector(out, "v", s.v);
  WriteVector(out, "kappa", s.kappa);
}

Checkpoint ReadCheckpoint(std::istream& in) {
  Checkpoint ckpt;
  Expect(in, "pathsgd-checkpoint");
  int version = 0;
  if (!(in >> version) || version != 1) Fail("unsupported version");
  Expect(in, "params");
  long m = -1;
  if (!(in >> m) || m < 0) Fail("bad parameter count");
  Expect(in, "spec");
  std::string first;
  in >> first;
  if (first != "none") {
    RnnSpec r;
    std::string hidden;
    int bias = 0;
    r.depth = std::atoi(first.c_str());
    if (!(in >> r.input_dim >> hidden >> r.output_dim >> r.length >> bias)) Fail("bad spec line");
    r.hidden_dims.clear();
    std::stringstream hs(hidden);
    for (std::string item; std::getline(hs, item, ',');) r.hidden_dims.push_back(std::stoi(item));
    r.bias = bias != 0;
    r.Validate();
    ckpt.spec = r;
  }
  OptimizerConfig c;
  std::string kind, mode;
  Expect(in, "optimizer");
  if (!(in >> kind >> mode)) Fail("bad optimizer line");
  c.kind = ParseOptimizerKind(kind);
  c.kappa_mode = ParseKappaMode(mode);
  c.lr = ReadNumber(in);
  c.kappa_floor = ReadNumber(in);
  if (!(in >> c.kappa_every)) Fail("bad kappa_every");
  c.beta1 = ReadNumber(in);
  c.beta2 = ReadNumber(in);
  c.adam_eps = ReadNumber(in);
  ckpt.state.config = c;
  Expect(in, "step");
  in >> ckpt.state.step;
  Expect(in, "adam_t");
  in >> ckpt.state.adam_t;
  Expect(in, "kappa_step");
  if (!(in >> ckpt.state.kappa_step)) Fail("bad step line");
  ckpt.params = ReadVector(in, "p");
  if (ckpt.params.size() != m) Fail("parameter count mismatch");
  ckpt.state.m = ReadVector(in, "m");
  ckpt.state.v = ReadVector(in, "v");
  ckpt.state.kappa = ReadVector(in, "kappa");
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp + "'");
    WriteCheckpoint(ckpt, out);
    if (!out) throw std::runtime_error("I/O error writing checkpoint '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return ReadCheckpoint(in);
}

}  // namespace pathsgd
