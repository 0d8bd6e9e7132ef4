// tests/test_model.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "marginsv/model.h"
#include "marginsv/optimizer.h"
#include "marginsv/rng.h"
#include "support/oracles.h"

using namespace marginsv;

namespace {

ModelConfig tiny_config(Pooling pooling, bool projector) {
  ModelConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden_dim = 6;
  cfg.repr_dim = 4;
  cfg.proj_hidden = 7;
  cfg.proj_dim = 3;
  cfg.pooling = pooling;
  cfg.use_projector = projector;
  return cfg;
}

FeatureMatrix random_features(Eigen::Index t, Eigen::Index f, uint64_t seed) {
  FeatureMatrix fm;
  fm.values.resize(t, f);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < f; ++j) fm.values(i, j) = rng.normal();
  fm.normalized = true;
  return fm;
}

}  // namespace

TEST_CASE("forward produces the advertised shapes") {
  for (bool projector : {true, false}) {
    for (Pooling pooling : {Pooling::kMean, Pooling::kAttentive}) {
      Model model(tiny_config(pooling, projector));
      Rng rng(1);
      model.init(rng);
      auto fwd = model.forward(random_features(9, 5, 2));
      CHECK(fwd.y.size() == 4);
      CHECK(fwd.z.size() == (projector ? 3 : 4));
      CHECK(model.embedding_dim() == (projector ? 3 : 4));
      if (!projector) CHECK((fwd.z - fwd.y).cwiseAbs().maxCoeff() == 0.0);
      Eigen::VectorXd y = model.represent(random_features(9, 5, 2));
      CHECK((y - fwd.y).cwiseAbs().maxCoeff() == 0.0);
      if (pooling == Pooling::kAttentive) {
        CHECK(fwd.attn_alpha.size() == 9);
        CHECK(fwd.attn_alpha.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fwd.attn_alpha.minCoeff() >= 0.0);
      }
    }
  }
}

TEST_CASE("initialization stays in the fan-in bound with zero biases") {
  ModelConfig cfg;  // full-size model
  Model model(cfg);
  Rng rng(3);
  model.init(rng);
  const bool is_bias[Model::kNumTensors] = {
      false, true, false, true, false, true, false,
      false, true, false, true, false, true};
  for (int id = 0; id < Model::kNumTensors; ++id) {
    if (!model.tensor_active(id)) {
      CHECK(model.tensor(id).size() == 0);
      continue;
    }
    const auto& t = model.tensor(id);
    if (is_bias[id]) {
      CHECK(t.cwiseAbs().maxCoeff() == 0.0);
    } else {
      const double fan_in =
          id == Model::kAttnV ? static_cast<double>(t.rows())
                              : static_cast<double>(t.cols());
      CHECK(t.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / fan_in));
      CHECK(t.cwiseAbs().maxCoeff() > 0.0);
    }
  }
}

TEST_CASE("inactive tensors stay empty end to end") {
  Model mean_model(tiny_config(Pooling::kMean, false));
  Rng rng(4);
  mean_model.init(rng);
  for (int id : {Model::kAttnW, Model::kAttnB, Model::kAttnV, Model::kProjW1,
                 Model::kProjB1, Model::kProjW2, Model::kProjB2}) {
    CHECK_FALSE(mean_model.tensor_active(id));
    CHECK(mean_model.tensor(id).size() == 0);
  }
  auto grads = mean_model.zero_grads();
  for (int id = 0; id < Model::kNumTensors; ++id) {
    CHECK(grads[id].rows() == mean_model.tensor(id).rows());
    CHECK(grads[id].cols() == mean_model.tensor(id).cols());
    CHECK(grads[id].cwiseAbs().sum() == 0.0);
  }
}

TEST_CASE("manual backprop matches finite differences through every tensor") {
  for (bool projector : {true, false}) {
    for (Pooling pooling : {Pooling::kMean, Pooling::kAttentive}) {
      CAPTURE(projector);
      CAPTURE(static_cast<int>(pooling));
      Model model(tiny_config(pooling, projector));
      Rng rng(5);
      model.init(rng);
      auto f = random_features(9, 5, 6);
      Rng crng(7);
      Eigen::VectorXd c(model.embedding_dim());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = crng.normal();

      auto fwd = model.forward(f);
      auto grads = model.zero_grads();
      model.backward(fwd, c, &grads);

      const double h = 1e-6;
      for (int id = 0; id < Model::kNumTensors; ++id) {
        if (!model.tensor_active(id)) continue;
        auto& t = model.tensor(id);
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
          for (Eigen::Index col = 0; col < t.cols(); ++col) {
            const double keep = t(r, col);
            t(r, col) = keep + h;
            const double up = c.dot(model.forward(f).z);
            t(r, col) = keep - h;
            const double dn = c.dot(model.forward(f).z);
            t(r, col) = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double got = grads[id](r, col);
            const double denom =
                std::max({std::abs(fd), std::abs(got), 1e-4});
            CHECK(std::abs(fd - got) / denom < 1e-4);
          }
        }
      }
    }
  }
}

TEST_CASE("stale tapes are rejected after a parameter update") {
  Model model(tiny_config(Pooling::kMean, true));
  Rng rng(8);
  model.init(rng);
  auto f = random_features(6, 5, 9);
  auto fwd = model.forward(f);
  model.bump_revision();
  auto grads = model.zero_grads();
  Eigen::VectorXd gz = Eigen::VectorXd::Ones(model.embedding_dim());
  CHECK_THROWS_AS(model.backward(fwd, gz, &grads), std::logic_error);
}

TEST_CASE("adam matches an independent scalar reference") {
  Model model(tiny_config(Pooling::kMean, true));
  Rng rng(10);
  model.init(rng);
  AdamConfig cfg;
  Adam adam(cfg, model);

  // Independent reference: same tensors flattened into plain vectors.
  struct Ref {
    std::vector<double> p, m, v;
  };
  std::vector<Ref> ref(Model::kNumTensors);
  for (int id = 0; id < Model::kNumTensors; ++id) {
    const auto& t = model.tensor(id);
    ref[id].p.assign(t.data(), t.data() + t.size());
    ref[id].m.assign(t.size(), 0.0);
    ref[id].v.assign(t.size(), 0.0);
  }

  Rng grng(11);
  for (int step = 1; step <= 3; ++step) {
    auto grads = model.zero_grads();
    for (int id = 0; id < Model::kNumTensors; ++id)
      for (Eigen::Index k = 0; k < grads[id].size(); ++k)
        grads[id].data()[k] = grng.normal();

    adam.step(&model, grads, cfg.lr);

    for (int id = 0; id < Model::kNumTensors; ++id) {
      auto& r = ref[id];
      for (size_t k = 0; k < r.p.size(); ++k) {
        const double g = grads[id].data()[k];
        r.m[k] = cfg.beta1 * r.m[k] + (1.0 - cfg.beta1) * g;
        r.v[k] = cfg.beta2 * r.v[k] + (1.0 - cfg.beta2) * g * g;
        const double mh = r.m[k] / (1.0 - std::pow(cfg.beta1, step));
        const double vh = r.v[k] / (1.0 - std::pow(cfg.beta2, step));
        r.p[k] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
        CHECK(model.tensor(id).data()[k] ==
              doctest::Approx(r.p[k]).epsilon(1e-12));
      }
    }
  }
  CHECK(adam.step_count() == 3);
}

TEST_CASE("adam co-updates the learnable margin scalar") {
  Model model(tiny_config(Pooling::kMean, false));
  Rng rng(12);
  model.init(rng);
  AdamConfig cfg;
  Adam adam(cfg, model);
  double margin = 0.1;
  auto grads = model.zero_grads();
  adam.step(&model, grads, cfg.lr, &margin, 0.5);
  // One bias-corrected step against gradient 0.5.
  const double m = (1.0 - cfg.beta1) * 0.5 / (1.0 - cfg.beta1);
  const double v = (1.0 - cfg.beta2) * 0.25 / (1.0 - cfg.beta2);
  const double expect = 0.1 - cfg.lr * m / (std::sqrt(v) + cfg.eps);
  CHECK(margin == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("learning rate decays at epoch boundaries") {
  AdamConfig cfg;
  cfg.lr = 0.001;
  cfg.lr_decay = 0.95;
  cfg.lr_decay_every_epochs = 10;
  CHECK(lr_at_epoch(cfg, 0) == 0.001);
  CHECK(lr_at_epoch(cfg, 9) == 0.001);
  CHECK(lr_at_epoch(cfg, 10) == doctest::Approx(0.00095).epsilon(1e-12));
  CHECK(lr_at_epoch(cfg, 25) ==
        doctest::Approx(0.001 * 0.95 * 0.95).epsilon(1e-12));
  CHECK_THROWS_AS(lr_at_epoch(cfg, -1), std::invalid_argument);
}

TEST_CASE("config validation rejects bad dimensions") {
  ModelConfig cfg;
  cfg.hidden_dim = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ModelConfig{};
  cfg.proj_dim = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("pooling names round-trip") {
  CHECK(pooling_from_string(to_string(Pooling::kMean)) == Pooling::kMean);
  CHECK(pooling_from_string(to_string(Pooling::kAttentive)) ==
        Pooling::kAttentive);
  CHECK_THROWS_AS(pooling_from_string("bogus"), std::invalid_argument);
}
