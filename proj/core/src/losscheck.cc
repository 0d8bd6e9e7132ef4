// core/src/losscheck.cc

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

#include "marginsv/losscheck.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "marginsv/losses.h"
#include "marginsv/rng.h"

namespace marginsv {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kGradTol = 1e-5;
// Entries below this magnitude are assessed against the floor instead of
// their own size; finite-difference roundoff dominates genuine error there.
constexpr double kGradFloor = 1e-4;

Eigen::MatrixXd random_batch(Rng& rng, int n, int d) {
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

double naive_cos(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return u.dot(v) / (u.norm() * v.norm());
}

// Positive-pair similarity in the probability domain, per variant.
double naive_pos_sim(LossVariant variant, double c, double m, double tau) {
  switch (variant) {
    case LossVariant::kNtXent:
    case LossVariant::kSntXent:
      return std::exp(c / tau);
    case LossVariant::kSntXentAm:
      return std::exp((c - m) / tau);
    case LossVariant::kSntXentAam: {
      const double cc = std::clamp(c, -1.0 + 1e-7, 1.0 - 1e-7);
      return std::exp(std::cos(std::acos(cc) + m) / tau);
    }
  }
  return 0.0;
}

// Direct per-pair enumeration of the anchors-from-one-view loss: mean over
// i of -log(sim(z_i, z'_i) / sum_a sim(z_i, z'_a)).
double naive_one_view_loss(const Eigen::MatrixXd& z, const Eigen::MatrixXd& zp,
                           double tau) {
  const auto n = z.rows();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
      denom += std::exp(naive_cos(z.row(i), zp.row(a)) / tau);
    loss += -std::log(std::exp(naive_cos(z.row(i), zp.row(i)) / tau) / denom);
  }
  return loss / static_cast<double>(n);
}

// Direct enumeration of the all-views loss: 2N anchors, the other view of
// the same utterance as positive, the remaining 2(N-1) rows as negatives.
// Reports the anchor/negative counts it visited.
double naive_all_views_loss(const Eigen::MatrixXd& z,
                            const Eigen::MatrixXd& zp, double tau, double m,
                            LossVariant variant, int* positives_seen = nullptr,
                            int* negatives_per_anchor = nullptr) {
  const auto n = z.rows();
  Eigen::MatrixXd w(2 * n, z.cols());
  w << z, zp;
  double loss = 0.0;
  int pos_count = 0;
  int neg_count_last = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const Eigen::Index j = (i + n) % (2 * n);
    const double pos = naive_pos_sim(variant, naive_cos(w.row(i), w.row(j)),
                                     m, tau);
    ++pos_count;
    double denom = pos;
    int negs = 0;
    for (Eigen::Index a = 0; a < 2 * n; ++a) {
      if (a == i || a == j) continue;
      denom += std::exp(naive_cos(w.row(i), w.row(a)) / tau);
      ++negs;
    }
    neg_count_last = negs;
    loss += -std::log(pos / denom);
  }
  if (positives_seen) *positives_seen = pos_count;
  if (negatives_per_anchor) *negatives_per_anchor = neg_count_last;
  return loss / static_cast<double>(2 * n);
}

double loss_value(const Eigen::MatrixXd& z, const Eigen::MatrixXd& zp,
                  const LossConfig& cfg, double margin) {
  return compute_loss(z, zp, cfg, 0, &margin).loss;
}

// Worst finite-difference discrepancy over both embedding matrices and,
// for margin-bearing variants, the margin scalar.
double fd_worst_rel_err(const Eigen::MatrixXd& z, const Eigen::MatrixXd& zp,
                        const LossConfig& cfg, double margin) {
  const LossOutput out = compute_loss(z, zp, cfg, 0, &margin);
  double worst = 0.0;
  auto assess = [&](double analytic, double fd) {
    const double denom = std::max({std::abs(analytic), std::abs(fd),
                                   kGradFloor});
    worst = std::max(worst, std::abs(analytic - fd) / denom);
  };

  for (int which = 0; which < 2; ++which) {
    const Eigen::MatrixXd& base = which == 0 ? z : zp;
    const Eigen::MatrixXd& grad = which == 0 ? out.grad_z : out.grad_zprime;
    for (Eigen::Index i = 0; i < base.rows(); ++i) {
      for (Eigen::Index j = 0; j < base.cols(); ++j) {
        Eigen::MatrixXd hi = base, lo = base;
        hi(i, j) += kFdStep;
        lo(i, j) -= kFdStep;
        const double fhi = which == 0 ? loss_value(hi, zp, cfg, margin)
                                      : loss_value(z, hi, cfg, margin);
        const double flo = which == 0 ? loss_value(lo, zp, cfg, margin)
                                      : loss_value(z, lo, cfg, margin);
        assess(grad(i, j), (fhi - flo) / (2.0 * kFdStep));
      }
    }
  }

  if (cfg.variant == LossVariant::kSntXentAm ||
      cfg.variant == LossVariant::kSntXentAam) {
    const double fhi = loss_value(z, zp, cfg, margin + kFdStep);
    const double flo = loss_value(z, zp, cfg, margin - kFdStep);
    assess(out.margin_grad, (fhi - flo) / (2.0 * kFdStep));
  }
  return worst;
}

struct VariantCase {
  LossVariant variant;
  double margin;
};

const std::vector<VariantCase>& variant_cases() {
  static const std::vector<VariantCase> kCases = {
      {LossVariant::kNtXent, 0.0},      {LossVariant::kSntXent, 0.0},
      {LossVariant::kSntXentAm, 0.1},   {LossVariant::kSntXentAm, 0.4},
      {LossVariant::kSntXentAam, 0.05}, {LossVariant::kSntXentAam, 0.1}};
  return kCases;
}

std::string case_name(const VariantCase& c) {
  std::string s = to_string(c.variant);
  if (c.variant == LossVariant::kSntXentAm ||
      c.variant == LossVariant::kSntXentAam)
    s += " m=" + std::to_string(c.margin).substr(0, 4);
  return s;
}

}  // namespace

std::vector<LossCheckResult> run_loss_checks(uint64_t seed, int grad_batches,
                                             int batch_size) {
  std::vector<LossCheckResult> results;
  const std::vector<int> n_sweep =
      batch_size == 0 ? std::vector<int>{2, 4, 8} : std::vector<int>{batch_size};
  const std::vector<int> d_sweep = {3, 16};
  const std::vector<double> tau_sweep = {0.5, 0.02};

  // Finite-difference gradients per variant.
  for (const auto& vc : variant_cases()) {
    Rng rng(derive_seed(seed, 1, static_cast<uint64_t>(vc.variant),
                        static_cast<uint64_t>(vc.margin * 100)));
    double worst = 0.0;
    for (int b = 0; b < grad_batches; ++b) {
      const int n = n_sweep[b % n_sweep.size()];
      const int d = d_sweep[b % d_sweep.size()];
      LossConfig cfg;
      cfg.variant = vc.variant;
      cfg.tau = tau_sweep[b % tau_sweep.size()];
      cfg.margin = vc.margin;
      const Eigen::MatrixXd z = random_batch(rng, n, d);
      const Eigen::MatrixXd zp = random_batch(rng, n, d);
      worst = std::max(worst, fd_worst_rel_err(z, zp, cfg, vc.margin));
    }
    results.push_back({"grad vs finite differences: " + case_name(vc), worst,
                       kGradTol, worst < kGradTol});
  }

  // Vectorized losses against per-pair enumeration.
  {
    Rng rng(derive_seed(seed, 2));
    double worst_one_view = 0.0, worst_all_views = 0.0;
    for (int b = 0; b < 100; ++b) {
      const int n = 2 + b % 15;  // N in [2, 16]
      const int d = d_sweep[b % d_sweep.size()];
      const double tau = tau_sweep[b % tau_sweep.size()];
      const Eigen::MatrixXd z = random_batch(rng, n, d);
      const Eigen::MatrixXd zp = random_batch(rng, n, d);

      LossConfig cfg;
      cfg.tau = tau;
      cfg.variant = LossVariant::kNtXent;
      worst_one_view =
          std::max(worst_one_view, std::abs(compute_loss(z, zp, cfg, 0).loss -
                                            naive_one_view_loss(z, zp, tau)));

      const auto& vc = variant_cases()[1 + b % 5];  // all-views variants
      cfg.variant = vc.variant;
      cfg.margin = vc.margin;
      double m = vc.margin;
      worst_all_views = std::max(
          worst_all_views,
          std::abs(compute_loss(z, zp, cfg, 0, &m).loss -
                   naive_all_views_loss(z, zp, tau, m, vc.variant)));
    }
    results.push_back({"one-view loss vs enumeration", worst_one_view, 1e-10,
                       worst_one_view < 1e-10});
    results.push_back({"all-views losses vs enumeration", worst_all_views,
                       1e-10, worst_all_views < 1e-10});
  }

  // Anchor bookkeeping: 2N positive pairs, 2(N-1) negatives per anchor.
  {
    Rng rng(derive_seed(seed, 3));
    bool ok = true;
    for (int n = 2; n <= 16; ++n) {
      const Eigen::MatrixXd z = random_batch(rng, n, 4);
      const Eigen::MatrixXd zp = random_batch(rng, n, 4);
      int positives = 0, negatives = 0;
      naive_all_views_loss(z, zp, 0.5, 0.0, LossVariant::kSntXent, &positives,
                           &negatives);
      ok = ok && positives == 2 * n && negatives == 2 * (n - 1);
    }
    results.push_back({"pair counts 2N / 2(N-1)", ok ? 0.0 : 1.0, 0.5, ok});
  }

  // Margin-zero reductions.
  {
    Rng rng(derive_seed(seed, 4));
    double worst_am = 0.0, worst_aam = 0.0;
    for (int b = 0; b < 20; ++b) {
      const int n = 2 + b % 7;
      const Eigen::MatrixXd z = random_batch(rng, n, 8);
      const Eigen::MatrixXd zp = random_batch(rng, n, 8);
      LossConfig cfg;
      cfg.tau = tau_sweep[b % tau_sweep.size()];
      double zero = 0.0;
      cfg.variant = LossVariant::kSntXent;
      const double base = compute_loss(z, zp, cfg, 0).loss;
      cfg.variant = LossVariant::kSntXentAm;
      worst_am = std::max(
          worst_am, std::abs(compute_loss(z, zp, cfg, 0, &zero).loss - base));
      cfg.variant = LossVariant::kSntXentAam;
      worst_aam = std::max(
          worst_aam, std::abs(compute_loss(z, zp, cfg, 0, &zero).loss - base));
    }
    results.push_back(
        {"additive margin m=0 reduction", worst_am, 1e-12, worst_am < 1e-12});
    results.push_back({"angular margin m=0 reduction", worst_aam, 1e-9,
                       worst_aam < 1e-9});
  }

  // Fixed two-utterance reference values.
  {
    Eigen::MatrixXd z(2, 2);
    z << 1, 0, 0, 1;
    LossConfig cfg;
    cfg.tau = 1.0;
    double worst = 0.0;
    cfg.variant = LossVariant::kNtXent;
    worst = std::max(worst, std::abs(compute_loss(z, z, cfg, 0).loss -
                                     (std::log(std::exp(1.0) + 1.0) - 1.0)));
    cfg.variant = LossVariant::kSntXent;
    worst = std::max(worst, std::abs(compute_loss(z, z, cfg, 0).loss -
                                     (std::log(std::exp(1.0) + 2.0) - 1.0)));
    cfg.variant = LossVariant::kSntXentAm;
    double m = 0.5;
    worst = std::max(worst,
                     std::abs(compute_loss(z, z, cfg, 0, &m).loss -
                              (std::log(std::exp(0.5) + 2.0) - 0.5)));
    cfg.variant = LossVariant::kSntXentAam;
    m = 0.1;
    const double c = 1.0 - 1e-7;
    const double pos = std::cos(std::acos(c) + 0.1);
    worst = std::max(worst,
                     std::abs(compute_loss(z, z, cfg, 0, &m).loss -
                              (std::log(std::exp(pos) + 2.0) - pos)));
    results.push_back(
        {"two-utterance reference values", worst, 1e-9, worst < 1e-9});
  }

  return results;
}

bool all_passed(const std::vector<LossCheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace marginsv
