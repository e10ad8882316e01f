# Copyright 2026 The pathsgd Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import pathsgd


def unit(length):
    return pathsgd.RnnSpec(input_dim=1, hidden=[1], output_dim=1, length=length)


def test_graph_counts():
    net = pathsgd.build_rnn(unit(2))
    assert (net.num_params, net.num_edges) == (3, 5)
    ok, invariant, _ = net.validate()
    assert ok and invariant == ""
    assert sorted(net.edges_for_param(0)) == sorted(set(net.edges_for_param(0)))
    assert pathsgd.build_feedforward([2, 3, 1]).num_params == 9
    assert net.to_text().startswith("pathsgd-net 1")


def test_forward_example():
    net = pathsgd.build_rnn(unit(2))
    y = pathsgd.forward(net, np.ones(3), np.array([0.5, 0.25]))
    np.testing.assert_array_equal(y, [0.5, 0.75])


def test_kappa_hand_values():
    ones = np.ones(3)
    k1, k2 = pathsgd.kappa(pathsgd.build_rnn(unit(2)), ones)
    np.testing.assert_array_equal(k1 + k2, [3, 1, 3])
    k1, k2 = pathsgd.kappa_rnn(unit(3), ones)
    assert k1[1] == 4.0 and k2[1] == 4.0
    assert pathsgd.gamma(pathsgd.build_rnn(unit(3)), ones) == 6.0
    assert pathsgd.kappa_fd(pathsgd.build_rnn(unit(3)), ones)[1] == pytest.approx(8.0, rel=1e-6)


def test_path_sgd_example():
    net = pathsgd.build_rnn(unit(2))
    p = pathsgd.path_sgd_step(net, np.ones(3), np.array([0.3, 0.1, 0.3]), 1.0)
    np.testing.assert_allclose(p, [0.9, 0.9, 0.9], rtol=1e-15)
    np.testing.assert_array_equal(pathsgd.sgd_step(np.ones(2), np.array([1.0, -1.0]), 0.1), [0.9, 1.1])


def test_rescaling_invariance():
    spec = pathsgd.RnnSpec(input_dim=2, hidden=[3], output_dim=2, length=3)
    p = pathsgd.init_params(spec, seed=3, rec_range=0.5, nonrec_range=0.5)
    q = pathsgd.apply_rescaling(spec, p, [np.array([2.0, 0.5, 7.0])])
    net = pathsgd.build_rnn(spec)
    x = np.linspace(-1, 1, 6)
    np.testing.assert_allclose(pathsgd.forward(net, p, x), pathsgd.forward(net, q, x), atol=1e-12)
    assert pathsgd.gamma(net, p) == pytest.approx(pathsgd.gamma_bruteforce(net, p), rel=1e-12)


def test_errors_surface_as_exceptions():
    with pytest.raises(ValueError):
        pathsgd.RnnSpec(length=0)
    with pytest.raises(ValueError):
        pathsgd.forward(pathsgd.build_rnn(unit(2)), np.ones(3), np.ones(5))


def test_verify_quick():
    results = pathsgd.verify("quick", 1)
    assert len(results) >= 10
    assert all(r["passed"] for r in results)


def test_train_linreg(tmp_path):
    out = pathsgd.train({
        "task": "linreg", "optimizer": "path_sgd", "lr": "0.5", "steps": "300",
        "eval_interval": "100", "out_dir": str(tmp_path / "run"),
    })
    assert out["status"] == "budget_exhausted"
    assert [row["step"] for row in out["history"]] == [0, 100, 200, 300]
    assert out["history"][-1]["train_loss"] < 1e-6
    assert math.isclose(out["params"][0], 2.0, rel_tol=1e-6)
    assert (tmp_path / "run" / "metrics.csv").exists()
