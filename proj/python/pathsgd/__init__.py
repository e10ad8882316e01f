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

"""Path-SGD and path-regularizer tools for shared-weight ReLU networks."""

from ._pathsgd import (
    RnnSpec,
    SharedWeightNet,
    apply_rescaling,
    build_feedforward,
    build_rnn,
    forward,
    gamma,
    gamma_bruteforce,
    init_params,
    kappa,
    kappa_fd,
    kappa_ratio,
    kappa_rnn,
    path_sgd_step,
    sgd_step,
    train,
    verify,
)

__all__ = [
    "RnnSpec",
    "SharedWeightNet",
    "apply_rescaling",
    "build_feedforward",
    "build_rnn",
    "forward",
    "gamma",
    "gamma_bruteforce",
    "init_params",
    "kappa",
    "kappa_fd",
    "kappa_ratio",
    "kappa_rnn",
    "path_sgd_step",
    "sgd_step",
    "train",
    "verify",
]
