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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pathsgd/commands.h"
#include "pathsgd/compute.h"
#include "pathsgd/config.h"
#include "pathsgd/graph.h"
#include "pathsgd/invariance.h"
#include "pathsgd/optim.h"
#include "pathsgd/pathnorm.h"
#include "pathsgd/verify.h"

namespace py = pybind11;
using namespace pathsgd;

namespace {

KappaMode Mode(const std::string& name) { return ParseKappaMode(name); }

NodeScaling Scaling(const RnnSpec& spec, const std::vector<Eigen::VectorXd>& alpha) {
  NodeScaling s = NodeScaling::Identity(spec);
  if (alpha.size() != s.alpha.size()) throw std::invalid_argument("alpha: one vector per hidden layer");
  s.alpha = alpha;
  return s;
}

py::dict Train(const std::map<std::string, std::string>& config) {
  RunConfig c = RunConfigFromMap(config);
  std::ostringstream log;
  TrainOutcome o;
  {
    py::gil_scoped_release release;
    o = RunTraining(c, log);
  }
  py::list history;
  for (const auto& row : o.result.history) {
    py::dict r;
    r["step"] = row.step;
    r["train_loss"] = row.train_loss;
    r["train_metric"] = row.train_metric;
    r["test_metric"] = row.test_metric;
    if (row.kappa_ratio) r["kappa_ratio"] = *row.kappa_ratio;
    history.append(r);
  }
  py::dict out;
  out["status"] = TrainStatusName(o.result.status);
  out["exit_code"] = o.exit_code;
  out["steps"] = o.result.state.step;
  out["final_test_metric"] = o.result.final_test_metric;
  out["params"] = o.result.params;
  out["history"] = history;
  out["out_dir"] = o.out_dir;
  return out;
}

}  // namespace

PYBIND11_MODULE(_pathsgd, m) {
  m.doc() = "Path-SGD and path-regularizer tools for shared-weight ReLU networks";

  py::class_<RnnSpec>(m, "RnnSpec")
      .def(py::init([](int input_dim, std::vector<int> hidden, int output_dim, int length, bool bias) {
             RnnSpec s;
             s.input_dim = input_dim;
             s.hidden_dims = std::move(hidden);
             s.depth = static_cast<int>(s.hidden_dims.size()) + 1;
             s.output_dim = output_dim;
             s.length = length;
             s.bias = bias;
             s.Validate();
             return s;
           }),
           py::arg("input_dim") = 1, py::arg("hidden") = std::vector<int>{1},
           py::arg("output_dim") = 1, py::arg("length") = 1, py::arg("bias") = false)
      .def_readonly("depth", &RnnSpec::depth)
      .def_readonly("input_dim", &RnnSpec::input_dim)
      .def_readonly("hidden", &RnnSpec::hidden_dims)
      .def_readonly("output_dim", &RnnSpec::output_dim)
      .def_readonly("length", &RnnSpec::length)
      .def_readonly("bias", &RnnSpec::bias)
      .def_property_readonly("num_params", [](const RnnSpec& s) { return MakeRnnLayout(s).num_params; })
      .def("__repr__", [](const RnnSpec& s) {
        std::ostringstream o;
        o << "RnnSpec(input_dim=" << s.input_dim << ", hidden=[";
        for (size_t i = 0; i < s.hidden_dims.size(); ++i) o << (i ? ", " : "") << s.hidden_dims[i];
        o << "], output_dim=" << s.output_dim << ", length=" << s.length
          << ", bias=" << (s.bias ? "True" : "False") << ")";
        return o.str();
      });

  py::class_<SharedWeightNet>(m, "SharedWeightNet")
      .def_property_readonly("num_nodes", &SharedWeightNet::num_nodes)
      .def_property_readonly("num_edges", &SharedWeightNet::num_edges)
      .def_property_readonly("num_params", &SharedWeightNet::num_params)
      .def("edges_for_param", [](const SharedWeightNet& n, int i) { return EdgesForParam(n, i); })
      .def("validate", [](const SharedWeightNet& n) {
        const ValidationReport r = Validate(n);
        return py::make_tuple(r.ok, r.invariant, r.detail);
      })
      .def("to_text", [](const SharedWeightNet& n) {
        std::ostringstream o;
        WriteNetText(n, o);
        return o.str();
      });

  m.def("build_rnn", &BuildRnn, py::arg("spec"));
  m.def("build_feedforward", &BuildFeedforward, py::arg("layer_dims"));

  m.def("forward", [](const SharedWeightNet& net, const ParamVector& p, const Eigen::VectorXd& x,
                      const std::string& act) { return Forward(net, p, x, ParseActivation(act)).outputs; },
        py::arg("net"), py::arg("p"), py::arg("x"), py::arg("activation") = "relu");

  m.def("gamma", &GammaRecursive, py::arg("net"), py::arg("p"));
  m.def("gamma_bruteforce", &GammaBruteforce, py::arg("net"), py::arg("p"),
        py::arg("max_paths") = kDefaultMaxPaths);
  m.def("kappa", [](const SharedWeightNet& net, const ParamVector& p) {
    const KappaVector k = ComputeKappa(net, p);
    return py::make_tuple(k.k1, k.k2);
  }, py::arg("net"), py::arg("p"), "Returns (kappa1, kappa2).");
  m.def("kappa_rnn", [](const RnnSpec& spec, const ParamVector& p) {
    const KappaVector k = ComputeKappa(spec, p, KappaMode::kBothTerms);
    return py::make_tuple(k.k1, k.k2);
  }, py::arg("spec"), py::arg("p"), "Dense closed form; returns (kappa1, kappa2).");
  m.def("kappa_fd", &KappaFd, py::arg("net"), py::arg("p"), py::arg("rel_step") = 1e-4);
  m.def("kappa_ratio", py::overload_cast<const SharedWeightNet&, const ParamVector&>(&KappaRatio),
        py::arg("net"), py::arg("p"));

  m.def("apply_rescaling", [](const RnnSpec& spec, const ParamVector& p,
                              const std::vector<Eigen::VectorXd>& alpha) {
    return ApplyRescaling(spec, p, Scaling(spec, alpha));
  }, py::arg("spec"), py::arg("p"), py::arg("alpha"));

  m.def("init_params", [](const RnnSpec& spec, std::uint64_t seed, const std::string& scheme,
                          double rec_range, double nonrec_range) {
    InitConfig c;
    c.scheme = ParseInitScheme(scheme);
    c.rec_range = rec_range;
    c.nonrec_range = nonrec_range;
    std::mt19937_64 rng = DeriveRng(seed, kStreamInit);
    return InitRnnParams(spec, c, rng);
  }, py::arg("spec"), py::arg("seed") = 1, py::arg("scheme") = "uniform",
        py::arg("rec_range") = 0.1, py::arg("nonrec_range") = 0.1);

  m.def("sgd_step", &SgdStep, py::arg("p"), py::arg("g"), py::arg("lr"));
  m.def("path_sgd_step",
        [](const SharedWeightNet& net, const ParamVector& p, const Eigen::VectorXd& g, double lr,
           const std::string& mode, double floor) { return PathSgdStep(net, p, g, lr, Mode(mode), floor); },
        py::arg("net"), py::arg("p"), py::arg("g"), py::arg("lr"), py::arg("kappa_mode") = "k1",
        py::arg("kappa_floor") = 1e-8);

  m.def("verify", [](const std::string& level, std::uint64_t seed) {
    py::list out;
    for (const auto& r : RunVerifySuite(level == "full" ? VerifyLevel::kFull : VerifyLevel::kQuick, seed)) {
      py::dict d;
      d["name"] = r.name;
      d["instances"] = r.instances;
      d["worst"] = r.worst;
      d["tolerance"] = r.tolerance;
      d["passed"] = r.pass();
      out.append(d);
    }
    return out;
  }, py::arg("level") = "quick", py::arg("seed") = 1);

  m.def("train", &Train, py::arg("config"),
        "Runs a training job from a {key: value} config and returns status and history.");
}
