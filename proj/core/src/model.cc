// core/src/model.cc

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

#include "marginsv/model.h"

#include <cmath>
#include <stdexcept>

namespace marginsv {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& a) { return a.cwiseMax(0.0); }

// 1 where the pre-activation was positive, else 0.
Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& a) {
  return (a.array() > 0.0).cast<double>().matrix();
}

}  // namespace

std::string to_string(Pooling p) {
  return p == Pooling::kMean ? "mean" : "attentive";
}

Pooling pooling_from_string(const std::string& name) {
  if (name == "mean") return Pooling::kMean;
  if (name == "attentive") return Pooling::kAttentive;
  throw std::invalid_argument("unknown pooling: " + name);
}

void ModelConfig::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || repr_dim < 1)
    throw std::invalid_argument("model: dimensions must be positive");
  if (use_projector && (proj_hidden < 1 || proj_dim < 1))
    throw std::invalid_argument("model: projector dimensions must be positive");
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int f = cfg_.input_dim, h = cfg_.hidden_dim, r = cfg_.repr_dim;
  params_[kEncW1] = Eigen::MatrixXd::Zero(h, f);
  params_[kEncB1] = Eigen::MatrixXd::Zero(h, 1);
  params_[kEncW2] = Eigen::MatrixXd::Zero(h, h);
  params_[kEncB2] = Eigen::MatrixXd::Zero(h, 1);
  if (cfg_.pooling == Pooling::kAttentive) {
    params_[kAttnW] = Eigen::MatrixXd::Zero(h, h);
    params_[kAttnB] = Eigen::MatrixXd::Zero(h, 1);
    params_[kAttnV] = Eigen::MatrixXd::Zero(h, 1);
  }
  params_[kHeadW] = Eigen::MatrixXd::Zero(r, h);
  params_[kHeadB] = Eigen::MatrixXd::Zero(r, 1);
  if (cfg_.use_projector) {
    params_[kProjW1] = Eigen::MatrixXd::Zero(cfg_.proj_hidden, r);
    params_[kProjB1] = Eigen::MatrixXd::Zero(cfg_.proj_hidden, 1);
    params_[kProjW2] = Eigen::MatrixXd::Zero(cfg_.proj_dim, cfg_.proj_hidden);
    params_[kProjB2] = Eigen::MatrixXd::Zero(cfg_.proj_dim, 1);
  }
}

const char* Model::tensor_name(int id) {
  static const char* kNames[kNumTensors] = {
      "enc.w1", "enc.b1", "enc.w2", "enc.b2",
      "attn.w", "attn.b", "attn.v",
      "head.w", "head.b",
      "proj.w1", "proj.b1", "proj.w2", "proj.b2"};
  return kNames[id];
}

bool Model::tensor_active(int id) const {
  if (id >= kAttnW && id <= kAttnV)
    return cfg_.pooling == Pooling::kAttentive;
  if (id >= kProjW1) return cfg_.use_projector;
  return true;
}

void Model::init(Rng& rng) {
  for (int id = 0; id < kNumTensors; ++id) {
    if (!tensor_active(id)) continue;
    Eigen::MatrixXd& t = params_[id];
    const bool is_bias =
        id == kEncB1 || id == kEncB2 || id == kAttnB || id == kHeadB ||
        id == kProjB1 || id == kProjB2;
    if (is_bias) {
      t.setZero();
      continue;
    }
    // Weight fan-in: columns for W tensors; rows for the attention vector,
    // which contracts against a hidden-dim activation.
    const double fan_in = id == kAttnV ? t.rows() : t.cols();
    const double bound = std::sqrt(6.0 / fan_in);
    for (Eigen::Index i = 0; i < t.size(); ++i)
      t.data()[i] = rng.uniform(-bound, bound);
  }
  ++revision_;
}

Model::TensorSet Model::zero_grads() const {
  TensorSet g;
  for (int id = 0; id < kNumTensors; ++id)
    g[id] = Eigen::MatrixXd::Zero(params_[id].rows(), params_[id].cols());
  return g;
}

Model::Forward Model::forward(const FeatureMatrix& f) const {
  if (f.values.cols() != cfg_.input_dim)
    throw std::invalid_argument("model: feature dim mismatch");
  if (f.values.rows() < 1)
    throw std::invalid_argument("model: empty feature matrix");

  Forward t;
  t.revision = revision_;
  t.x = f.values;

  t.a1 = (t.x * params_[kEncW1].transpose()).rowwise() +
         params_[kEncB1].col(0).transpose();
  t.h1 = relu(t.a1);
  t.a2 = (t.h1 * params_[kEncW2].transpose()).rowwise() +
         params_[kEncB2].col(0).transpose();
  t.h2 = relu(t.a2);

  if (cfg_.pooling == Pooling::kMean) {
    t.pooled = t.h2.colwise().mean();
  } else {
    t.attn_u = ((t.h2 * params_[kAttnW].transpose()).rowwise() +
                params_[kAttnB].col(0).transpose())
                   .array()
                   .tanh()
                   .matrix();
    Eigen::VectorXd e = t.attn_u * params_[kAttnV].col(0);
    const double top = e.maxCoeff();
    Eigen::VectorXd w = (e.array() - top).exp();
    t.attn_alpha = w / w.sum();
    t.pooled = t.h2.transpose() * t.attn_alpha;
  }

  t.y = params_[kHeadW] * t.pooled + params_[kHeadB].col(0);
  if (cfg_.use_projector) {
    t.p1_pre = params_[kProjW1] * t.y + params_[kProjB1].col(0);
    t.p1 = t.p1_pre.cwiseMax(0.0);
    t.z = params_[kProjW2] * t.p1 + params_[kProjB2].col(0);
  } else {
    t.z = t.y;
  }
  return t;
}

Eigen::VectorXd Model::represent(const FeatureMatrix& f) const {
  return forward(f).y;
}

void Model::backward(const Forward& fwd, const Eigen::VectorXd& grad_z,
                     TensorSet* grads) const {
  if (fwd.revision != revision_)
    throw std::logic_error(
        "model: stale tape (parameters updated since forward)");
  if (grad_z.size() != embedding_dim())
    throw std::invalid_argument("model: grad_z dimension mismatch");
  TensorSet& g = *grads;

  Eigen::VectorXd dy;
  if (cfg_.use_projector) {
    g[kProjW2] += grad_z * fwd.p1.transpose();
    g[kProjB2] += grad_z;
    Eigen::VectorXd dp1 = params_[kProjW2].transpose() * grad_z;
    Eigen::VectorXd dp1_pre =
        dp1.cwiseProduct(relu_mask(fwd.p1_pre).col(0));
    g[kProjW1] += dp1_pre * fwd.y.transpose();
    g[kProjB1] += dp1_pre;
    dy = params_[kProjW1].transpose() * dp1_pre;
  } else {
    dy = grad_z;
  }

  g[kHeadW] += dy * fwd.pooled.transpose();
  g[kHeadB] += dy;
  const Eigen::VectorXd dpooled = params_[kHeadW].transpose() * dy;

  const auto T = fwd.h2.rows();
  Eigen::MatrixXd dh2(T, cfg_.hidden_dim);
  if (cfg_.pooling == Pooling::kMean) {
    dh2 = Eigen::VectorXd::Constant(T, 1.0 / T) * dpooled.transpose();
  } else {
    const Eigen::VectorXd dalpha = fwd.h2 * dpooled;
    dh2 = fwd.attn_alpha * dpooled.transpose();
    // Softmax backward: de = alpha .* (dalpha - alpha . dalpha).
    const double mix = fwd.attn_alpha.dot(dalpha);
    const Eigen::VectorXd de = fwd.attn_alpha.cwiseProduct(
        (dalpha.array() - mix).matrix());
    g[kAttnV] += fwd.attn_u.transpose() * de;
    const Eigen::MatrixXd du = de * params_[kAttnV].col(0).transpose();
    const Eigen::MatrixXd da =
        du.cwiseProduct((1.0 - fwd.attn_u.array().square()).matrix());
    g[kAttnW] += da.transpose() * fwd.h2;
    g[kAttnB] += da.colwise().sum().transpose();
    dh2 += da * params_[kAttnW];
  }

  const Eigen::MatrixXd da2 = dh2.cwiseProduct(relu_mask(fwd.a2));
  g[kEncW2] += da2.transpose() * fwd.h1;
  g[kEncB2] += da2.colwise().sum().transpose();
  const Eigen::MatrixXd dh1 = da2 * params_[kEncW2];
  const Eigen::MatrixXd da1 = dh1.cwiseProduct(relu_mask(fwd.a1));
  g[kEncW1] += da1.transpose() * fwd.x;
  g[kEncB1] += da1.colwise().sum().transpose();
}

}  // namespace marginsv
