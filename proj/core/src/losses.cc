// core/src/losses.cc

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

#include "marginsv/losses.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace marginsv {

namespace {

constexpr double kCosineClamp = 1.0 - 1e-7;

void check_batch(const EmbeddingBatch& z, const EmbeddingBatch& zprime) {
  if (z.rows() != zprime.rows() || z.cols() != zprime.cols())
    throw std::invalid_argument("loss: Z and Z' must have the same shape");
  if (z.rows() < 2)
    throw std::invalid_argument(
        "loss: batch size must be >= 2 (no negatives otherwise)");
  if (!z.allFinite() || !zprime.allFinite())
    throw std::invalid_argument("loss: embeddings contain non-finite values");
}

// Rows scaled to unit norm; errors out on a zero row.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& m,
                               Eigen::VectorXd* norms) {
  norms->resize(m.rows());
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n <= 0.0)
      throw std::invalid_argument("loss: zero-norm embedding row");
    (*norms)(i) = n;
    out.row(i) = m.row(i) / n;
  }
  return out;
}

// Chain rule through row normalization: given dL/d(row/|row|), produce
// dL/d(row).
Eigen::MatrixXd backprop_normalization(const Eigen::MatrixXd& grad_unit,
                                       const Eigen::MatrixXd& unit,
                                       const Eigen::VectorXd& norms) {
  Eigen::MatrixXd out(unit.rows(), unit.cols());
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double radial = grad_unit.row(i).dot(unit.row(i));
    out.row(i) = (grad_unit.row(i) - radial * unit.row(i)) / norms(i);
  }
  return out;
}

double max_abs(const Eigen::MatrixXd& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

// Positive-pair logit, its derivative w.r.t. the cosine, and its derivative
// w.r.t. the margin, per variant.
struct PositiveLogit {
  double value;
  double d_cos;
  double d_margin;
};

PositiveLogit positive_logit(LossVariant variant, double cos_uv, double m,
                             double tau) {
  switch (variant) {
    case LossVariant::kNtXent:
    case LossVariant::kSntXent:
      return {pair_logit(cos_uv, tau), 1.0 / tau, 0.0};
    case LossVariant::kSntXentAm: {
      double d_cos = 1.0 / tau;
      if (faults::am_grad_sign_flip.load(std::memory_order_relaxed))
        d_cos = -d_cos;
      return {positive_logit_am(cos_uv, m, tau), d_cos, -1.0 / tau};
    }
    case LossVariant::kSntXentAam: {
      const double c = clamp_cosine(cos_uv);
      const double sin_theta = std::sqrt(1.0 - c * c);
      const double value = (c * std::cos(m) - sin_theta * std::sin(m)) / tau;
      // Hard clamp: no sensitivity to the cosine outside the clamp range.
      const bool clamped = cos_uv != c;
      const double d_cos =
          clamped ? 0.0 : (std::cos(m) + c * std::sin(m) / sin_theta) / tau;
      const double d_margin = -(c * std::sin(m) + sin_theta * std::cos(m)) / tau;
      return {value, d_cos, d_margin};
    }
  }
  throw std::logic_error("unknown loss variant");
}

}  // namespace

std::string to_string(LossVariant v) {
  switch (v) {
    case LossVariant::kNtXent: return "ntxent";
    case LossVariant::kSntXent: return "sntxent";
    case LossVariant::kSntXentAm: return "am";
    case LossVariant::kSntXentAam: return "aam";
  }
  return "?";
}

LossVariant loss_variant_from_string(const std::string& name) {
  if (name == "ntxent") return LossVariant::kNtXent;
  if (name == "sntxent") return LossVariant::kSntXent;
  if (name == "am" || name == "sntxent-am") return LossVariant::kSntXentAm;
  if (name == "aam" || name == "sntxent-aam") return LossVariant::kSntXentAam;
  throw std::invalid_argument("unknown loss variant: " + name);
}

double margin_at(int64_t step, const MarginSchedule& sched) {
  if (step < 0) throw std::invalid_argument("margin_at: negative step");
  if (sched.kind == MarginSchedule::Kind::kConstant) return sched.final_margin;
  if (sched.total_steps <= 0)
    throw std::invalid_argument("margin_at: total_steps must be positive");
  const double progress =
      std::min(2.0 * static_cast<double>(step) / sched.total_steps, 1.0);
  return sched.final_margin *
         (1.0 - std::cos(std::numbers::pi * progress)) / 2.0;
}

void LossConfig::validate() const {
  if (tau <= 0.0) throw std::invalid_argument("loss: tau must be > 0");
  if (margin < 0.0) throw std::invalid_argument("loss: margin must be >= 0");
  if (variant == LossVariant::kSntXentAam &&
      margin >= std::numbers::pi / 2.0)
    throw std::invalid_argument("loss: AAM margin must be < pi/2");
}

double cosine_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const double nu = u.norm(), nv = v.norm();
  if (nu <= 0.0 || nv <= 0.0)
    throw std::invalid_argument("cosine_similarity: zero-norm vector");
  return u.dot(v) / (nu * nv);
}

double clamp_cosine(double c) {
  return std::clamp(c, -kCosineClamp, kCosineClamp);
}

double pair_logit(double cos_uv, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("pair_logit: tau must be > 0");
  return cos_uv / tau;
}

double positive_logit_am(double cos_uv, double m, double tau) {
  return (cos_uv - m) / tau;
}

double positive_logit_aam(double cos_uv, double m, double tau) {
  const double c = clamp_cosine(cos_uv);
  return (c * std::cos(m) - std::sqrt(1.0 - c * c) * std::sin(m)) / tau;
}

LossOutput nt_xent(const EmbeddingBatch& z, const EmbeddingBatch& zprime,
                   const LossConfig& cfg) {
  check_batch(z, zprime);
  const Eigen::Index n = z.rows();
  const double tau = cfg.tau;

  Eigen::VectorXd norms_z, norms_zp;
  const Eigen::MatrixXd uz = normalize_rows(z, &norms_z);
  const Eigen::MatrixXd uzp = normalize_rows(zprime, &norms_zp);
  const Eigen::MatrixXd cos = uz * uzp.transpose();

  double loss = 0.0;
  Eigen::MatrixXd grad_cos = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd logits = cos.row(i) / tau;
    const double top = logits.maxCoeff();
    const double lse = top + std::log((logits.array() - top).exp().sum());
    loss += lse - logits(i);
    for (Eigen::Index a = 0; a < n; ++a) {
      const double p = std::exp(logits(a) - lse);
      grad_cos(i, a) = (p - (a == i ? 1.0 : 0.0)) / (n * tau);
    }
  }
  loss /= static_cast<double>(n);

  LossOutput out;
  out.loss = loss;
  out.grad_z =
      backprop_normalization(grad_cos * uzp, uz, norms_z);
  out.grad_zprime =
      backprop_normalization(grad_cos.transpose() * uz, uzp, norms_zp);
  out.diagnostics.mean_pos_cos = cos.diagonal().mean();
  out.diagnostics.mean_neg_cos =
      n > 1 ? (cos.sum() - cos.trace()) / static_cast<double>(n * (n - 1))
            : 0.0;
  out.diagnostics.grad_max_norm =
      std::max(max_abs(out.grad_z), max_abs(out.grad_zprime));
  return out;
}

LossOutput snt_xent(const EmbeddingBatch& z, const EmbeddingBatch& zprime,
                    const LossConfig& cfg, double margin) {
  check_batch(z, zprime);
  const Eigen::Index n = z.rows();
  const Eigen::Index n2 = 2 * n;
  const double tau = cfg.tau;

  Eigen::MatrixXd stacked(n2, z.cols());
  stacked << z, zprime;
  Eigen::VectorXd norms;
  const Eigen::MatrixXd unit = normalize_rows(stacked, &norms);
  const Eigen::MatrixXd cos = unit * unit.transpose();

  double loss = 0.0;
  double margin_grad = 0.0;
  Eigen::MatrixXd grad_cos = Eigen::MatrixXd::Zero(n2, n2);
  for (Eigen::Index i = 0; i < n2; ++i) {
    const Eigen::Index j = (i + n) % n2;
    const PositiveLogit pos =
        positive_logit(cfg.variant, cos(i, j), margin, tau);

    // Log-sum-exp over the positive logit and the 2(N-1) negative logits.
    double top = pos.value;
    for (Eigen::Index a = 0; a < n2; ++a) {
      if (a == i || a == j) continue;
      top = std::max(top, cos(i, a) / tau);
    }
    double sum = std::exp(pos.value - top);
    for (Eigen::Index a = 0; a < n2; ++a) {
      if (a == i || a == j) continue;
      sum += std::exp(cos(i, a) / tau - top);
    }
    const double lse = top + std::log(sum);
    loss += lse - pos.value;

    const double p_pos = std::exp(pos.value - lse);
    grad_cos(i, j) += (p_pos - 1.0) * pos.d_cos / n2;
    margin_grad += (p_pos - 1.0) * pos.d_margin / n2;
    for (Eigen::Index a = 0; a < n2; ++a) {
      if (a == i || a == j) continue;
      grad_cos(i, a) += std::exp(cos(i, a) / tau - lse) / (tau * n2);
    }
  }
  loss /= static_cast<double>(n2);

  const Eigen::MatrixXd grad_unit =
      (grad_cos + grad_cos.transpose()) * unit;
  const Eigen::MatrixXd grad_stacked =
      backprop_normalization(grad_unit, unit, norms);

  LossOutput out;
  out.loss = loss;
  out.grad_z = grad_stacked.topRows(n);
  out.grad_zprime = grad_stacked.bottomRows(n);
  out.margin_grad = margin_grad;
  out.effective_margin = margin;

  double pos_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) pos_sum += cos(i, i + n);
  out.diagnostics.mean_pos_cos = pos_sum / static_cast<double>(n);
  // Negatives per anchor: row sum minus self (cos=1) minus the positive.
  double neg_sum = 0.0;
  for (Eigen::Index i = 0; i < n2; ++i)
    neg_sum += cos.row(i).sum() - cos(i, i) - cos(i, (i + n) % n2);
  out.diagnostics.mean_neg_cos =
      neg_sum / static_cast<double>(n2 * (n2 - 2));
  out.diagnostics.grad_max_norm =
      std::max(max_abs(out.grad_z), max_abs(out.grad_zprime));
  return out;
}

LossOutput compute_loss(const EmbeddingBatch& z, const EmbeddingBatch& zprime,
                        const LossConfig& cfg, int64_t step,
                        const double* margin_override) {
  cfg.validate();
  if (cfg.variant == LossVariant::kNtXent) {
    LossOutput out = nt_xent(z, zprime, cfg);
    out.effective_margin = 0.0;
    return out;
  }
  double m = margin_override ? *margin_override
                             : margin_at(step, cfg.schedule());
  if (cfg.variant == LossVariant::kSntXent) m = 0.0;
  return snt_xent(z, zprime, cfg, m);
}

}  // namespace marginsv
