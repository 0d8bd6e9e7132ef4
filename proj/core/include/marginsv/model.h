// core/include/marginsv/model.h

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

#ifndef MARGINSV_MODEL_H_
#define MARGINSV_MODEL_H_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "marginsv/features.h"
#include "marginsv/rng.h"

namespace marginsv {

enum class Pooling { kMean, kAttentive };

std::string to_string(Pooling p);
Pooling pooling_from_string(const std::string& name);

struct ModelConfig {
  int input_dim = 40;    // mel bands per frame
  int hidden_dim = 64;   // per-frame MLP width
  int repr_dim = 128;    // representation y
  int proj_hidden = 256; // projector hidden width
  int proj_dim = 128;    // contrastive embedding z
  Pooling pooling = Pooling::kMean;
  bool use_projector = true;

  // Throws std::invalid_argument on non-positive dimensions.
  void validate() const;
};

// Per-frame MLP encoder with temporal pooling and a linear head, plus an
// optional two-layer projector. Gradients are computed by hand against a
// tape of forward intermediates.
class Model {
 public:
  // Parameter tensors in visitation order. Attention tensors exist only
  // under attentive pooling, projector tensors only when enabled; inactive
  // slots stay 0x0 everywhere (parameters, gradients, optimizer moments).
  enum TensorId {
    kEncW1, kEncB1, kEncW2, kEncB2,
    kAttnW, kAttnB, kAttnV,
    kHeadW, kHeadB,
    kProjW1, kProjB1, kProjW2, kProjB2,
    kNumTensors
  };
  using TensorSet = std::array<Eigen::MatrixXd, kNumTensors>;

  explicit Model(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  static const char* tensor_name(int id);
  bool tensor_active(int id) const;
  Eigen::MatrixXd& tensor(int id) { return params_[id]; }
  const Eigen::MatrixXd& tensor(int id) const { return params_[id]; }

  // Dimension of the loss-facing embedding z.
  int embedding_dim() const {
    return cfg_.use_projector ? cfg_.proj_dim : cfg_.repr_dim;
  }

  // Weights uniform in ±sqrt(6 / fan_in), biases zero, in tensor order.
  void init(Rng& rng);

  // Correctly shaped all-zero gradient accumulator.
  TensorSet zero_grads() const;

  // Forward intermediates for one utterance view. Tied to the parameter
  // revision it was computed under.
  struct Forward {
    Eigen::VectorXd y;  // representation (repr_dim)
    Eigen::VectorXd z;  // embedding (equals y when the projector is off)
    Eigen::MatrixXd x;            // T x input_dim
    Eigen::MatrixXd a1, h1;       // T x hidden, first layer pre/post ReLU
    Eigen::MatrixXd a2, h2;       // T x hidden, second layer
    Eigen::MatrixXd attn_u;       // T x hidden, tanh activations
    Eigen::VectorXd attn_alpha;   // T, softmax frame weights
    Eigen::VectorXd pooled;       // hidden
    Eigen::VectorXd p1_pre, p1;   // projector hidden pre/post ReLU
    uint64_t revision = 0;
  };

  Forward forward(const FeatureMatrix& f) const;

  // Representation y only (the verification-time path).
  Eigen::VectorXd represent(const FeatureMatrix& f) const;

  // Accumulates dL/dparam into grads given dL/dz. Throws std::logic_error
  // when the tape predates the current parameters.
  void backward(const Forward& fwd, const Eigen::VectorXd& grad_z,
                TensorSet* grads) const;

  // Revision counter; the optimizer bumps it after every parameter update
  // so stale tapes are detectable.
  uint64_t revision() const { return revision_; }
  void bump_revision() { ++revision_; }

 private:
  ModelConfig cfg_;
  TensorSet params_;
  uint64_t revision_ = 0;
};

}  // namespace marginsv

#endif  // MARGINSV_MODEL_H_
