// core/include/marginsv/optimizer.h

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

#ifndef MARGINSV_OPTIMIZER_H_
#define MARGINSV_OPTIMIZER_H_

#include <cstdint>

#include "marginsv/model.h"

namespace marginsv {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr_decay = 0.95;          // multiplicative
  int lr_decay_every_epochs = 10;  // applied at epoch boundaries

  void validate() const;
};

// lr * decay^floor(epoch / every), epochs counted from 0.
double lr_at_epoch(const AdamConfig& cfg, int epoch);

// Adam with bias correction and no weight decay. Also carries moment state
// for an optional scalar parameter (the learnable margin), updated inside
// the same step so both share the bias-correction counter.
class Adam {
 public:
  Adam(const AdamConfig& cfg, const Model& model);

  const AdamConfig& config() const { return cfg_; }
  int64_t step_count() const { return t_; }

  // One update: params -= lr_hat * m_hat / (sqrt(v_hat) + eps). Bumps the
  // model's revision. Pass margin to co-update the scalar.
  void step(Model* model, const Model::TensorSet& grads, double lr,
            double* margin = nullptr, double margin_grad = 0.0);

  // State access for checkpointing.
  Eigen::MatrixXd& moment_m(int id) { return m_[id]; }
  Eigen::MatrixXd& moment_v(int id) { return v_[id]; }
  const Eigen::MatrixXd& moment_m(int id) const { return m_[id]; }
  const Eigen::MatrixXd& moment_v(int id) const { return v_[id]; }
  double margin_m() const { return margin_m_; }
  double margin_v() const { return margin_v_; }
  void restore(int64_t t, double margin_m, double margin_v) {
    t_ = t;
    margin_m_ = margin_m;
    margin_v_ = margin_v;
  }

 private:
  AdamConfig cfg_;
  Model::TensorSet m_, v_;
  double margin_m_ = 0.0, margin_v_ = 0.0;
  int64_t t_ = 0;
};

}  // namespace marginsv

#endif  // MARGINSV_OPTIMIZER_H_
