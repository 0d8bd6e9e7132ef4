// core/include/marginsv/commands.h

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

#ifndef MARGINSV_COMMANDS_H_
#define MARGINSV_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "marginsv/config.h"
#include "marginsv/eval.h"

namespace marginsv {

// Command bodies behind the CLI binary. Each validates its inputs, does the
// work, and reports human-readable lines to `out`. Errors surface as
// exceptions; the CLI shell maps std::invalid_argument to exit code 1 and
// everything else to 2.

// Renders the synthetic corpus under corpus_dir. When
// config.heldout_speakers > 0 the last K speakers are reserved for
// evaluation: manifest_train.csv / manifest_heldout.csv carry the split and
// trials_heldout.txt holds balanced verification trials drawn from the
// held-out speakers only.
void cmd_gen_data(const ExperimentConfig& config, const std::string& corpus_dir,
                  std::ostream& out);

// Trains on corpus_dir/<manifest_name> and writes metrics.csv, model.ckpt,
// and a config.json snapshot under config.out_dir. resume_checkpoint, when
// nonempty, continues a previous run saved with the identical config.
void cmd_train(const ExperimentConfig& config, const std::string& corpus_dir,
               const std::string& manifest_name,
               const std::string& resume_checkpoint, std::ostream& out);

struct EvalReport {
  size_t num_trials = 0;
  size_t num_targets = 0;
  size_t num_nontargets = 0;
  DetMetrics det;
  ScoreStats stats;
};

// Scores trial_list with the checkpointed model (or, when untrained, a
// freshly initialized one built from config.model) and writes scores.csv,
// histogram.csv, and eval.json under config.out_dir. noisy corrupts every
// trial waveform with deterministic per-utterance additive noise and reverb
// before embedding, independent of the training-time augmentation policy.
EvalReport cmd_evaluate(const ExperimentConfig& config,
                        const std::string& corpus_dir,
                        const std::string& trial_list,
                        const std::string& checkpoint, bool untrained,
                        bool noisy, std::ostream& out);

// Runs the loss verification suite and prints one row per check. Returns
// true when every check passes. fault_am_sign_flip flips the sign of the
// additive-margin cosine gradient to demonstrate that the harness catches a
// wrong analytic derivative.
bool cmd_losscheck(uint64_t seed, int grad_batches, int batch_size,
                   bool fault_am_sign_flip, std::ostream& out);

// Reads a scores CSV and reports per-label score means and their gap;
// histogram_out, when nonempty, receives the fixed-bin histogram CSV.
ScoreStats cmd_score_stats(const std::string& scores_csv,
                           const std::string& histogram_out,
                           std::ostream& out);

}  // namespace marginsv

#endif  // MARGINSV_COMMANDS_H_
