// core/include/marginsv/trainer.h

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

#ifndef MARGINSV_TRAINER_H_
#define MARGINSV_TRAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "marginsv/augment.h"
#include "marginsv/features.h"
#include "marginsv/losses.h"
#include "marginsv/model.h"
#include "marginsv/optimizer.h"
#include "marginsv/wav.h"

namespace marginsv {

// Training-side view of a corpus: utterance ids and audio only. Speaker
// labels are dropped at load time, so nothing downstream of this class can
// read them; that is the self-supervision boundary.
class UtteranceStore {
 public:
  static UtteranceStore open(const std::string& corpus_dir,
                             const std::string& manifest_name = "manifest.csv");

  size_t size() const { return ids_.size(); }
  const std::string& utterance_id(size_t i) const { return ids_[i]; }
  const Waveform& audio(size_t i) const { return audio_[i]; }

 private:
  std::vector<std::string> ids_;
  std::vector<Waveform> audio_;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  uint64_t seed = 1;
  double crop_len_s = 2.0;
  // 0 runs the single-threaded reference path. Workers only prepare
  // augmented feature batches; optimizer updates stay sequential, so both
  // modes produce identical results.
  int num_workers = 0;
  uint64_t config_hash = 0;  // stamped into checkpoints, checked on resume

  AugmentPolicy augment;
  LossConfig loss;
  ModelConfig model;
  AdamConfig optim;
  FeatureConfig features;

  std::string metrics_path;         // per-step CSV; empty = no log
  std::string checkpoint_path;      // empty = no checkpoint
  int checkpoint_every_epochs = 0;  // additionally save every k epochs

  void validate() const;
};

struct TrainResult {
  Model model;
  int epochs_completed = 0;
  int64_t steps = 0;
  double first_epoch_mean_loss = 0.0;
  double final_epoch_mean_loss = 0.0;
  double final_margin = 0.0;
};

// Runs the two-view contrastive loop: per step, sample batch_size
// utterances, crop two non-overlapping views each, augment, featurize,
// forward both views, take the loss, backpropagate, and apply Adam.
// Deterministic given cfg.seed. resume_checkpoint continues a run saved
// with an identical config.
TrainResult train(const UtteranceStore& store, const TrainConfig& cfg,
                  const std::string& resume_checkpoint = "");

}  // namespace marginsv

#endif  // MARGINSV_TRAINER_H_
