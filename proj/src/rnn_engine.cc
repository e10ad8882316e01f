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

#include "pathsgd/rnn_engine.h"

#include <cmath>
#include <stdexcept>

namespace pathsgd {

RnnEngine::RnnEngine(RnnSpec spec, Activation act)
    : spec_(std::move(spec)), layout_(MakeRnnLayout(spec_)), act_(act) {}

void RnnEngine::CheckFormat(const ParamVector& p, const SequenceFormat& format) const {
  if (p.size() != layout_.num_params) {
    throw std::invalid_argument("RnnEngine: parameter vector has wrong length");
  }
  if (format.length != spec_.length || format.input_dim != spec_.input_dim ||
      format.output_dim != spec_.output_dim) {
    throw std::invalid_argument("RnnEngine: data format does not match the RNN spec");
  }
  CheckFinite(p, "parameter vector");
}

void RnnEngine::RunForward(const ParamVector& p, std::span<const SequenceExample* const> batch,
                           Workspace* ws) const {
  const int d = spec_.depth;
  const int T = spec_.length;
  const auto B = static_cast<Eigen::Index>(batch.size());
  ws->h.assign(d, std::vector<Eigen::MatrixXd>(T + 1));
  ws->y.assign(T + 1, Eigen::MatrixXd());
  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd& x = ws->h[0][t];
    x.resize(spec_.input_dim, B);
    for (Eigen::Index b = 0; b < B; ++b) x.col(b) = batch[b]->inputs.row(t - 1).transpose();
  }
  for (int i = 1; i < d; ++i) {
    ws->h[i][0].setZero(spec_.hidden_dims[i - 1], B);
  }
  for (int t = 1; t <= T; ++t) {
    for (int i = 1; i < d; ++i) {
      Eigen::MatrixXd z = BlockView(p, layout_.w_in[i - 1]) * ws->h[i - 1][t];
      if (t > 1) z.noalias() += BlockView(p, layout_.w_rec[i - 1]) * ws->h[i][t - 1];
      if (spec_.bias) z.colwise() += BlockView(p, layout_.b_hidden[i - 1]).col(0);
      if (act_ == Activation::kRelu) {
        ws->h[i][t] = z.cwiseMax(0.0);
      } else {
        ws->h[i][t] = z.array().tanh().matrix();
      }
    }
    ws->y[t] = BlockView(p, layout_.w_out) * ws->h[d - 1][t];
    if (spec_.bias) ws->y[t].colwise() += BlockView(p, layout_.b_out).col(0);
  }
}

double RnnEngine::ReadoutLoss(const Workspace& ws, std::span<const SequenceExample* const> batch,
                              const SequenceFormat& format,
                              std::vector<Eigen::MatrixXd>* d_y) const {
  const int T = spec_.length;
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int reads = format.readout_steps();
  const int out_dim = spec_.output_dim;
  if (d_y) d_y->assign(T + 1, Eigen::MatrixXd());
  double total = 0.0;
  for (int r = 0; r < reads; ++r) {
    const int t = format.readout_time(r);
    const Eigen::MatrixXd& y = ws.y[t];
    Eigen::MatrixXd grad;
    if (d_y) grad.setZero(out_dim, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const SequenceExample& ex = *batch[b];
      if (format.loss == LossKind::kMse) {
        const Eigen::VectorXd diff = y.col(b) - ex.targets.row(r).transpose();
        total += diff.squaredNorm() / (static_cast<double>(reads) * out_dim);
        if (d_y) grad.col(b) = diff * (2.0 / (static_cast<double>(reads) * out_dim * B));
      } else {
        const int label = ex.labels[r];
        const double shift = y.col(b).maxCoeff();
        const Eigen::VectorXd e = (y.col(b).array() - shift).exp().matrix();
        const double z = e.sum();
        total += (std::log(z) + shift - y(label, b)) / reads;
        if (d_y) {
          grad.col(b) = e / z;
          grad(label, b) -= 1.0;
          grad.col(b) /= static_cast<double>(reads) * B;
        }
      }
    }
    if (d_y) (*d_y)[t] = std::move(grad);
  }
  return total / static_cast<double>(B);
}

LossGrad RnnEngine::LossAndGrad(const ParamVector& p,
                                std::span<const SequenceExample* const> batch,
                                const SequenceFormat& format) const {
  if (batch.empty()) throw std::invalid_argument("RnnEngine: empty batch");
  CheckFormat(p, format);
  Workspace ws;
  RunForward(p, batch, &ws);
  std::vector<Eigen::MatrixXd> d_y;
  LossGrad result;
  result.loss = ReadoutLoss(ws, batch, format, &d_y);
  result.grad.setZero(layout_.num_params);

  const int d = spec_.depth;
  const int T = spec_.length;
  const auto B = static_cast<Eigen::Index>(batch.size());
  // carry[i]: dL/dh^i_t contributed through W_rec from step t + 1.
  std::vector<Eigen::MatrixXd> carry(d);
  for (int i = 1; i < d; ++i) carry[i].setZero(spec_.hidden_dims[i - 1], B);
  auto g_out = BlockView(result.grad, layout_.w_out);

  for (int t = T; t >= 1; --t) {
    Eigen::MatrixXd d_h;  // dL/dh at the current layer, time t
    if (d_y[t].size() > 0) {
      g_out.noalias() += d_y[t] * ws.h[d - 1][t].transpose();
      if (spec_.bias) BlockView(result.grad, layout_.b_out).col(0) += d_y[t].rowwise().sum();
      d_h = BlockView(p, layout_.w_out).transpose() * d_y[t];
    } else {
      d_h.setZero(spec_.hidden_dims[d - 2], B);
    }
    for (int i = d - 1; i >= 1; --i) {
      d_h += carry[i];
      const Eigen::MatrixXd& h = ws.h[i][t];
      Eigen::MatrixXd d_z;
      if (act_ == Activation::kRelu) {
        d_z = (h.array() > 0.0).select(d_h.array(), 0.0).matrix();
      } else {
        d_z = d_h.cwiseProduct((1.0 - h.array().square()).matrix());
      }
      BlockView(result.grad, layout_.w_in[i - 1]).noalias() += d_z * ws.h[i - 1][t].transpose();
      if (t > 1) {
        BlockView(result.grad, layout_.w_rec[i - 1]).noalias() +=
            d_z * ws.h[i][t - 1].transpose();
        carry[i].noalias() = BlockView(p, layout_.w_rec[i - 1]).transpose() * d_z;
      }
      if (spec_.bias) BlockView(result.grad, layout_.b_hidden[i - 1]).col(0) += d_z.rowwise().sum();
      if (i > 1) d_h = BlockView(p, layout_.w_in[i - 1]).transpose() * d_z;
    }
  }
  return result;
}

double RnnEngine::Loss(const ParamVector& p, std::span<const SequenceExample* const> batch,
                       const SequenceFormat& format) const {
  if (batch.empty()) throw std::invalid_argument("RnnEngine: empty batch");
  CheckFormat(p, format);
  Workspace ws;
  RunForward(p, batch, &ws);
  return ReadoutLoss(ws, batch, format, nullptr);
}

std::vector<Eigen::MatrixXd> RnnEngine::Readouts(const ParamVector& p,
                                                 std::span<const SequenceExample* const> batch,
                                                 const SequenceFormat& format) const {
  CheckFormat(p, format);
  std::vector<Eigen::MatrixXd> out(batch.size());
  if (batch.empty()) return out;
  Workspace ws;
  RunForward(p, batch, &ws);
  const int reads = format.readout_steps();
  for (size_t b = 0; b < batch.size(); ++b) {
    out[b].resize(reads, spec_.output_dim);
    for (int r = 0; r < reads; ++r) {
      out[b].row(r) = ws.y[format.readout_time(r)].col(static_cast<Eigen::Index>(b)).transpose();
    }
  }
  return out;
}

}  // namespace pathsgd
