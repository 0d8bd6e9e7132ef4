// core/src/optimizer.cc

// Copyright 2026  marginsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "marginsv/optimizer.h"

#include <cmath>
#include <stdexcept>

namespace marginsv {

void AdamConfig::validate() const {
  if (lr <= 0.0) throw std::invalid_argument("adam: lr must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw std::invalid_argument("adam: betas must lie in [0, 1)");
  if (eps <= 0.0) throw std::invalid_argument("adam: eps must be > 0");
  if (lr_decay <= 0.0 || lr_decay > 1.0)
    throw std::invalid_argument("adam: lr_decay must lie in (0, 1]");
  if (lr_decay_every_epochs < 1)
    throw std::invalid_argument("adam: decay interval must be >= 1");
}

double lr_at_epoch(const AdamConfig& cfg, int epoch) {
  if (epoch < 0) throw std::invalid_argument("lr_at_epoch: negative epoch");
  return cfg.lr * std::pow(cfg.lr_decay, epoch / cfg.lr_decay_every_epochs);
}

Adam::Adam(const AdamConfig& cfg, const Model& model) : cfg_(cfg) {
  cfg_.validate();
  m_ = model.zero_grads();
  v_ = model.zero_grads();
}

void Adam::step(Model* model, const Model::TensorSet& grads, double lr,
                double* margin, double margin_grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

  for (int id = 0; id < Model::kNumTensors; ++id) {
    Eigen::MatrixXd& p = model->tensor(id);
    if (p.size() == 0) continue;
    if (grads[id].rows() != p.rows() || grads[id].cols() != p.cols())
      throw std::invalid_argument("adam: gradient shape mismatch");
    m_[id] = cfg_.beta1 * m_[id] + (1.0 - cfg_.beta1) * grads[id];
    v_[id] = cfg_.beta2 * v_[id] +
             (1.0 - cfg_.beta2) * grads[id].cwiseProduct(grads[id]);
    p.array() -= lr * (m_[id].array() / bc1) /
                 ((v_[id].array() / bc2).sqrt() + cfg_.eps);
  }

  if (margin) {
    margin_m_ = cfg_.beta1 * margin_m_ + (1.0 - cfg_.beta1) * margin_grad;
    margin_v_ =
        cfg_.beta2 * margin_v_ + (1.0 - cfg_.beta2) * margin_grad * margin_grad;
    *margin -= lr * (margin_m_ / bc1) / (std::sqrt(margin_v_ / bc2) + cfg_.eps);
  }

  model->bump_revision();
}

}  // namespace marginsv
