// core/include/marginsv/config.h

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

#ifndef MARGINSV_CONFIG_H_
#define MARGINSV_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "marginsv/augment.h"
#include "marginsv/losses.h"
#include "marginsv/model.h"
#include "marginsv/optimizer.h"
#include "marginsv/synth.h"

namespace marginsv {

// Everything one experiment needs, mirroring the JSON config document.
// Precedence is flag > file > default; the CLI applies flags after loading.
struct ExperimentConfig {
  uint64_t seed = 1;
  std::string out_dir = "run";

  CorpusConfig corpus;        // corpus.seed is overwritten by seed
  int heldout_speakers = 0;   // reserved for evaluation-only trials

  AugmentPolicy augment;
  LossConfig loss;
  ModelConfig model;
  AdamConfig optim;

  int epochs = 50;
  int batch_size = 32;
  double crop_len_s = 2.0;
  int num_workers = 0;
  int checkpoint_every_epochs = 0;

  int eval_num_frames = 6;
  double eval_frame_len_s = 2.0;

  void validate() const;
};

// Strict parse: any key outside the published schema is rejected with an
// error naming it.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& c);

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const std::string& path,
                            const ExperimentConfig& c);

// FNV-1a over the canonical (sorted-key) JSON serialization, excluding
// out_dir so a resumed run may write elsewhere.
uint64_t config_hash(const ExperimentConfig& c);

// MC_SEED in the environment overrides every configured seed.
std::optional<uint64_t> env_seed_override();

}  // namespace marginsv

#endif  // MARGINSV_CONFIG_H_
