// core/include/marginsv/losses.h

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

#ifndef MARGINSV_LOSSES_H_
#define MARGINSV_LOSSES_H_

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <string>

namespace marginsv {

// N x D batch of embeddings, one row per utterance view. All loss math
// l2-normalizes rows internally and gradients flow through the
// normalization, so callers pass raw network outputs.
using EmbeddingBatch = Eigen::MatrixXd;

enum class LossVariant { kNtXent, kSntXent, kSntXentAm, kSntXentAam };

std::string to_string(LossVariant v);
LossVariant loss_variant_from_string(const std::string& name);

struct MarginSchedule {
  enum class Kind { kConstant, kCosineRamp };
  Kind kind = Kind::kConstant;
  int64_t total_steps = 1;
  double final_margin = 0.0;
};

// Margin at a given optimizer step. The cosine ramp grows from 0 to
// final_margin over the first half of training and is flat afterwards.
double margin_at(int64_t step, const MarginSchedule& sched);

struct LossConfig {
  LossVariant variant = LossVariant::kSntXent;
  double tau = 0.02;
  double margin = 0.0;
  MarginSchedule::Kind schedule_kind = MarginSchedule::Kind::kConstant;
  int64_t schedule_total_steps = 1;
  bool learnable_margin = false;

  MarginSchedule schedule() const {
    return {schedule_kind, schedule_total_steps, margin};
  }
  // Throws std::invalid_argument on bad tau/margin combinations.
  void validate() const;
};

struct LossDiagnostics {
  double mean_pos_cos = 0.0;
  double mean_neg_cos = 0.0;
  double grad_max_norm = 0.0;
};

struct LossOutput {
  double loss = 0.0;
  Eigen::MatrixXd grad_z;       // dL/dZ, same shape as Z
  Eigen::MatrixXd grad_zprime;  // dL/dZ'
  double margin_grad = 0.0;     // dL/dm (AM/AAM only; 0 otherwise)
  double effective_margin = 0.0;
  LossDiagnostics diagnostics;
};

// cos of the angle between u and v: dot product of the l2-normalized
// vectors. Throws on a zero-norm input.
double cosine_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Clamp to [-1 + 1e-7, 1 - 1e-7]; applied before any acos/sqrt so the
// angular-margin gradient stays bounded.
double clamp_cosine(double c);

// Log-domain pair similarity log l(u,v) = cos/tau. All losses work with
// these logits and log-sum-exp; tau = 0.02 makes raw exponentials unusable.
double pair_logit(double cos_uv, double tau);

// Positive-pair logit with an additive (cosine-space) margin:
// (cos - m) / tau.
double positive_logit_am(double cos_uv, double m, double tau);

// Positive-pair logit with an additive angular margin:
// cos(theta + m) / tau, expanded through the angle-addition identity.
double positive_logit_aam(double cos_uv, double m, double tau);

// Contrastive loss with anchors from Z only; positives/negatives from Z'.
LossOutput nt_xent(const EmbeddingBatch& z, const EmbeddingBatch& zprime,
                   const LossConfig& cfg);

// Symmetric formulation over the 2N concatenated views: every view is an
// anchor, its other view is the positive, the remaining 2(N-1) views are
// negatives. margin selects the effective m for the positive logit.
LossOutput snt_xent(const EmbeddingBatch& z, const EmbeddingBatch& zprime,
                    const LossConfig& cfg, double margin);

// Resolves the scheduled (or overridden, for a learnable margin) margin and
// dispatches on cfg.variant.
LossOutput compute_loss(const EmbeddingBatch& z, const EmbeddingBatch& zprime,
                        const LossConfig& cfg, int64_t step,
                        const double* margin_override = nullptr);

namespace faults {
// Test hook: flips the sign of the AM positive-logit derivative so the
// gradient checker can prove it catches a broken backward pass.
inline std::atomic<bool> am_grad_sign_flip{false};
}  // namespace faults

}  // namespace marginsv

#endif  // MARGINSV_LOSSES_H_
