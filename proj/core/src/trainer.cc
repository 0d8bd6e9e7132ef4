// core/src/trainer.cc

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

#include "marginsv/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <thread>
#include <utility>

#include "marginsv/checkpoint.h"
#include "marginsv/synth.h"

namespace marginsv {

namespace {

// RNG lanes: one stream per epoch drives the shuffle and the per-sample
// seeds; init and the noise bank get their own.
constexpr uint64_t kInitLane = 0x7a110001;
constexpr uint64_t kBankLane = 0x7a110002;
constexpr uint64_t kEpochLane = 0x7a110003;

constexpr double kLearnableMarginInit = 0.1;
constexpr double kLearnableMarginMax = 0.5;

struct PreparedSample {
  FeatureMatrix a, b;
};

PreparedSample prepare_sample(const UtteranceStore& store, size_t idx,
                              uint64_t sample_seed, const TrainConfig& cfg,
                              const NoiseBank& bank) {
  Rng rng(sample_seed);
  ViewPair pair = sample_view_pair(store.audio(idx), cfg.crop_len_s, rng);
  pair.utterance_id = store.utterance_id(idx);
  pair = augment(pair, cfg.augment, bank, rng);
  return {extract_features(pair.view_a, cfg.features),
          extract_features(pair.view_b, cfg.features)};
}

Checkpoint make_checkpoint(const Model& model, const Adam& adam,
                           const TrainConfig& cfg, int epochs_done,
                           int64_t global_step, double margin_value) {
  Checkpoint c;
  c.config_hash = cfg.config_hash;
  model_to_checkpoint(model, &c);
  adam_to_checkpoint(model, adam, &c);
  c.set_scalar("epoch", epochs_done);
  c.set_scalar("step", static_cast<double>(global_step));
  c.set_scalar("margin.value", margin_value);
  // Stream the next epoch will consume; resuming restores it verbatim.
  Rng next_epoch_rng(derive_seed(cfg.seed, kEpochLane, epochs_done));
  c.set_bytes("rng.state", next_epoch_rng.state());
  return c;
}

}  // namespace

UtteranceStore UtteranceStore::open(const std::string& corpus_dir,
                                    const std::string& manifest_name) {
  const SyntheticCorpus corpus = load_corpus(corpus_dir, manifest_name);
  UtteranceStore store;
  store.ids_.reserve(corpus.manifest.size());
  store.audio_.reserve(corpus.manifest.size());
  for (const auto& entry : corpus.manifest) {
    store.ids_.push_back(entry.utterance_id);
    store.audio_.push_back(read_wav(corpus_audio_path(corpus, entry)));
  }
  return store;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 2)
    throw std::invalid_argument("train: batch_size must be >= 2");
  if (crop_len_s <= 0.0)
    throw std::invalid_argument("train: crop_len_s must be > 0");
  if (num_workers < 0)
    throw std::invalid_argument("train: num_workers must be >= 0");
  if (loss.learnable_margin && loss.variant != LossVariant::kSntXentAm &&
      loss.variant != LossVariant::kSntXentAam)
    throw std::invalid_argument(
        "train: learnable margin requires a margin-bearing loss variant");
  augment.validate();
  loss.validate();
  model.validate();
  optim.validate();
}

TrainResult train(const UtteranceStore& store, const TrainConfig& cfg,
                  const std::string& resume_checkpoint) {
  cfg.validate();
  const size_t m = store.size();
  const size_t n = static_cast<size_t>(cfg.batch_size);
  if (m < n)
    throw std::invalid_argument("train: dataset smaller than one batch");
  const size_t steps_per_epoch = m / n;

  LossConfig loss_cfg = cfg.loss;
  if (loss_cfg.schedule_kind == MarginSchedule::Kind::kCosineRamp &&
      loss_cfg.schedule_total_steps <= 1)
    loss_cfg.schedule_total_steps =
        static_cast<int64_t>(cfg.epochs) * steps_per_epoch;

  const NoiseBank bank(derive_seed(cfg.seed, kBankLane), cfg.crop_len_s);

  Model model(cfg.model);
  Adam adam(cfg.optim, model);
  int start_epoch = 0;
  int64_t global_step = 0;
  double margin_value = cfg.loss.learnable_margin ? kLearnableMarginInit : 0.0;
  std::string resume_rng_state;

  if (!resume_checkpoint.empty()) {
    const Checkpoint c = load_checkpoint(resume_checkpoint);
    if (c.config_hash != cfg.config_hash)
      throw std::runtime_error(
          "train: checkpoint was produced under a different config");
    load_model_params(c, &model);
    load_adam_state(c, model, &adam);
    start_epoch = static_cast<int>(c.scalar("epoch"));
    global_step = static_cast<int64_t>(c.scalar("step"));
    margin_value = c.scalar("margin.value");
    resume_rng_state = c.bytes("rng.state");
    if (start_epoch >= cfg.epochs)
      throw std::invalid_argument("train: checkpoint already at final epoch");
  } else {
    Rng init_rng(derive_seed(cfg.seed, kInitLane));
    model.init(init_rng);
  }

  std::ofstream metrics;
  if (!cfg.metrics_path.empty()) {
    const bool fresh = resume_checkpoint.empty();
    metrics.open(cfg.metrics_path,
                 fresh ? std::ios::trunc : std::ios::app);
    if (!metrics)
      throw std::runtime_error("train: cannot open metrics file " +
                               cfg.metrics_path);
    if (fresh)
      metrics << "epoch,step,loss,mean_pos_cos,mean_neg_cos,grad_maxnorm,"
                 "margin\n";
    metrics << std::setprecision(17);
  }

  double* margin_ptr = cfg.loss.learnable_margin ? &margin_value : nullptr;
  double last_effective_margin = 0.0;
  TrainResult result{std::move(model)};
  Model& net = result.model;

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng(derive_seed(cfg.seed, kEpochLane, epoch));
    if (epoch == start_epoch && !resume_rng_state.empty())
      epoch_rng.set_state(resume_rng_state);

    // Fisher-Yates pass over the utterance order, then one seed per sample.
    std::vector<size_t> order(m);
    for (size_t i = 0; i < m; ++i) order[i] = i;
    for (size_t i = m - 1; i > 0; --i) {
      const size_t j = epoch_rng.uniform_index(i + 1);
      std::swap(order[i], order[j]);
    }
    const size_t used = steps_per_epoch * n;
    std::vector<uint64_t> sample_seeds(used);
    for (auto& s : sample_seeds) s = epoch_rng.next_u64();

    std::vector<PreparedSample> prepared(used);
    std::vector<char> ready(used, 0);
    if (cfg.num_workers > 0) {
      std::atomic<size_t> next{0};
      auto work = [&] {
        for (size_t k = next.fetch_add(1); k < used; k = next.fetch_add(1)) {
          prepared[k] =
              prepare_sample(store, order[k], sample_seeds[k], cfg, bank);
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(cfg.num_workers);
      for (int w = 0; w < cfg.num_workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
      std::fill(ready.begin(), ready.end(), 1);
    }

    const double lr = lr_at_epoch(cfg.optim, epoch);
    double epoch_loss_sum = 0.0;

    for (size_t b = 0; b < steps_per_epoch; ++b) {
      std::vector<Model::Forward> tapes_a(n), tapes_b(n);
      EmbeddingBatch z(n, net.embedding_dim());
      EmbeddingBatch zp(n, net.embedding_dim());
      for (size_t i = 0; i < n; ++i) {
        const size_t k = b * n + i;
        if (!ready[k])
          prepared[k] =
              prepare_sample(store, order[k], sample_seeds[k], cfg, bank);
        tapes_a[i] = net.forward(prepared[k].a);
        tapes_b[i] = net.forward(prepared[k].b);
        z.row(i) = tapes_a[i].z.transpose();
        zp.row(i) = tapes_b[i].z.transpose();
        prepared[k] = PreparedSample{};  // feature matrices are consumed
      }

      const LossOutput out =
          compute_loss(z, zp, loss_cfg, global_step, margin_ptr);

      Model::TensorSet grads = net.zero_grads();
      for (size_t i = 0; i < n; ++i) {
        net.backward(tapes_a[i], out.grad_z.row(i).transpose(), &grads);
        net.backward(tapes_b[i], out.grad_zprime.row(i).transpose(), &grads);
      }
      adam.step(&net, grads, lr, margin_ptr, out.margin_grad);
      if (margin_ptr)
        *margin_ptr = std::clamp(*margin_ptr, 0.0, kLearnableMarginMax);

      epoch_loss_sum += out.loss;
      last_effective_margin = out.effective_margin;
      if (metrics.is_open()) {
        metrics << epoch << ',' << global_step << ',' << out.loss << ','
                << out.diagnostics.mean_pos_cos << ','
                << out.diagnostics.mean_neg_cos << ','
                << out.diagnostics.grad_max_norm << ','
                << out.effective_margin << '\n';
      }
      ++global_step;
      ++result.steps;
    }

    const double mean_loss = epoch_loss_sum / steps_per_epoch;
    if (epoch == start_epoch) result.first_epoch_mean_loss = mean_loss;
    result.final_epoch_mean_loss = mean_loss;
    result.epochs_completed = epoch + 1;
    result.final_margin = margin_ptr ? *margin_ptr : last_effective_margin;

    if (!cfg.checkpoint_path.empty()) {
      const Checkpoint snap =
          make_checkpoint(net, adam, cfg, epoch + 1, global_step,
                          margin_value);
      // Periodic snapshots keep their own files so a later resume can start
      // from any of them; the plain path always holds the newest state.
      if (cfg.checkpoint_every_epochs > 0 &&
          (epoch + 1) % cfg.checkpoint_every_epochs == 0 &&
          epoch + 1 < cfg.epochs)
        save_checkpoint(
            cfg.checkpoint_path + ".epoch" + std::to_string(epoch + 1), snap);
      if (epoch + 1 == cfg.epochs)
        save_checkpoint(cfg.checkpoint_path, snap);
    }
  }

  if (metrics.is_open()) metrics.flush();
  return result;
}

}  // namespace marginsv
