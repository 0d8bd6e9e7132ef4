// tools/main.cc

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

// Command line front end. Subcommands: gen-data, train, evaluate, losscheck,
// score-stats. Option precedence is flag > config file > built-in default;
// the MC_SEED environment variable overrides every seed, flags included.
// Exit codes: 0 success, 1 usage error, 2 runtime error (losscheck also
// exits 2 when any check fails).

#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "marginsv/commands.h"
#include "marginsv/config.h"

namespace {

using marginsv::ExperimentConfig;

// Options shared by the config-driven subcommands.
struct CommonOpts {
  std::string config_path;
  uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string out_dir;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config_path,
                  "JSON experiment config (flags override its keys)")
      ->check(CLI::ExistingFile);
  o->seed_opt = cmd->add_option("--seed", o->seed, "Random seed");
  o->out_opt = cmd->add_option("--out", o->out_dir, "Output directory");
}

ExperimentConfig resolve_config(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = marginsv::load_experiment_config(o.config_path);
  if (o.seed_opt->count()) cfg.seed = o.seed;
  if (o.out_opt->count()) cfg.out_dir = o.out_dir;
  if (const auto env = marginsv::env_seed_override()) cfg.seed = *env;
  cfg.corpus.seed = cfg.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-supervised speaker verification workbench"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Render the synthetic corpus");
  CommonOpts gen_common;
  add_common(gen, &gen_common);
  gen_common.out_opt->required();
  int gen_speakers = 0, gen_utts = 0, gen_heldout = 0;
  double gen_len = 0.0;
  auto* gen_speakers_opt =
      gen->add_option("--speakers", gen_speakers, "Number of speakers");
  auto* gen_utts_opt = gen->add_option("--utterances", gen_utts,
                                       "Utterances per speaker");
  auto* gen_len_opt =
      gen->add_option("--len", gen_len, "Utterance length in seconds");
  auto* gen_heldout_opt = gen->add_option(
      "--heldout", gen_heldout,
      "Reserve the last K speakers for evaluation-only trials");

  // train
  auto* train = app.add_subcommand("train", "Train the embedding model");
  CommonOpts train_common;
  add_common(train, &train_common);
  std::string train_corpus, train_manifest = "manifest.csv", train_resume;
  train->add_option("--corpus", train_corpus, "Corpus directory")->required();
  train->add_option("--manifest", train_manifest,
                    "Manifest file name inside the corpus directory");
  train->add_option("--resume", train_resume, "Checkpoint to continue from")
      ->check(CLI::ExistingFile);
  int train_epochs = 0, train_batch = 0, train_workers = 0, train_ckpt_every = 0;
  double train_crop = 0.0, train_margin = 0.0, train_tau = 0.0;
  std::string train_loss, train_schedule, train_pooling;
  bool train_no_augment = false, train_no_projector = false,
       train_learnable_margin = false;
  auto* epochs_opt = train->add_option("--epochs", train_epochs, "Epochs");
  auto* batch_opt = train->add_option("--batch-size", train_batch, "Batch size");
  auto* workers_opt = train->add_option(
      "--workers", train_workers, "Batch preparation threads (0 = reference)");
  auto* crop_opt =
      train->add_option("--crop-len", train_crop, "View crop length, seconds");
  auto* loss_opt = train->add_option("--loss", train_loss,
                                     "Loss variant: ntxent|sntxent|am|aam");
  auto* margin_opt = train->add_option(
      "--margin", train_margin,
      "Final margin; implies the half-training cosine ramp unless --schedule "
      "constant is given");
  auto* tau_opt = train->add_option("--tau", train_tau, "Softmax temperature");
  auto* schedule_opt = train->add_option(
      "--schedule", train_schedule, "Margin schedule: constant|cosine_ramp");
  auto* pooling_opt = train->add_option("--pooling", train_pooling,
                                        "Frame pooling: mean|attentive");
  auto* ckpt_every_opt = train->add_option(
      "--checkpoint-every", train_ckpt_every,
      "Also snapshot the training state every K epochs");
  train->add_flag("--no-augment", train_no_augment,
                  "Disable view augmentation");
  train->add_flag("--no-projector", train_no_projector,
                  "Feed representations straight to the loss");
  train->add_flag("--learnable-margin", train_learnable_margin,
                  "Optimize the margin jointly with the model");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score verification trials");
  CommonOpts eval_common;
  add_common(eval, &eval_common);
  std::string eval_corpus, eval_trials, eval_checkpoint;
  bool eval_untrained = false, eval_noisy = false;
  int eval_frames = 0;
  double eval_frame_len = 0.0;
  eval->add_option("--corpus", eval_corpus, "Corpus directory")->required();
  eval->add_option("--trials", eval_trials, "Trial list file")->required();
  eval->add_option("--checkpoint", eval_checkpoint, "Model checkpoint")
      ->check(CLI::ExistingFile);
  eval->add_flag("--untrained", eval_untrained,
                 "Score with randomly initialized weights");
  eval->add_flag("--noisy", eval_noisy,
                 "Corrupt every trial utterance with deterministic noise");
  auto* frames_opt = eval->add_option("--num-frames", eval_frames,
                                      "Evenly spaced crops per utterance");
  auto* frame_len_opt =
      eval->add_option("--frame-len", eval_frame_len, "Crop length, seconds");

  // losscheck
  auto* check = app.add_subcommand(
      "losscheck", "Verify loss values and gradients against slow oracles");
  uint64_t check_seed = 1;
  int check_grad_batches = 20, check_batch = 0;
  bool check_fault = false;
  check->add_option("--seed", check_seed, "Random seed");
  check->add_option("--grad-batches", check_grad_batches,
                    "Finite-difference batches per variant");
  check->add_option("--batch", check_batch,
                    "Fixed batch size (0 sweeps 2, 4, 8)");
  check->add_flag("--fault-am-sign-flip", check_fault,
                  "Inject a wrong-sign margin gradient (harness self-test)");

  // score-stats
  auto* stats = app.add_subcommand(
      "score-stats", "Summarize a scores CSV: per-label means and gap");
  std::string stats_scores, stats_hist;
  stats->add_option("--scores", stats_scores, "Scores CSV from evaluate")
      ->required()
      ->check(CLI::ExistingFile);
  stats->add_option("--hist", stats_hist, "Histogram CSV to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      ExperimentConfig cfg = resolve_config(gen_common);
      if (gen_speakers_opt->count()) cfg.corpus.num_speakers = gen_speakers;
      if (gen_utts_opt->count()) cfg.corpus.utterances_per_speaker = gen_utts;
      if (gen_len_opt->count()) cfg.corpus.utterance_len_s = gen_len;
      if (gen_heldout_opt->count()) cfg.heldout_speakers = gen_heldout;
      cfg.corpus.seed = cfg.seed;
      marginsv::cmd_gen_data(cfg, gen_common.out_dir, std::cout);
      return 0;
    }
    if (train->parsed()) {
      ExperimentConfig cfg = resolve_config(train_common);
      if (epochs_opt->count()) cfg.epochs = train_epochs;
      if (batch_opt->count()) cfg.batch_size = train_batch;
      if (workers_opt->count()) cfg.num_workers = train_workers;
      if (crop_opt->count()) cfg.crop_len_s = train_crop;
      if (loss_opt->count())
        cfg.loss.variant = marginsv::loss_variant_from_string(train_loss);
      if (tau_opt->count()) cfg.loss.tau = train_tau;
      if (margin_opt->count()) {
        cfg.loss.margin = train_margin;
        if (!schedule_opt->count())
          cfg.loss.schedule_kind =
              marginsv::MarginSchedule::Kind::kCosineRamp;
      }
      if (schedule_opt->count()) {
        if (train_schedule == "constant")
          cfg.loss.schedule_kind = marginsv::MarginSchedule::Kind::kConstant;
        else if (train_schedule == "cosine_ramp")
          cfg.loss.schedule_kind = marginsv::MarginSchedule::Kind::kCosineRamp;
        else
          throw std::invalid_argument("unknown --schedule " + train_schedule);
      }
      if (pooling_opt->count())
        cfg.model.pooling = marginsv::pooling_from_string(train_pooling);
      if (ckpt_every_opt->count())
        cfg.checkpoint_every_epochs = train_ckpt_every;
      if (train_no_augment) cfg.augment.enabled = false;
      if (train_no_projector) cfg.model.use_projector = false;
      if (train_learnable_margin) cfg.loss.learnable_margin = true;
      marginsv::cmd_train(cfg, train_corpus, train_manifest, train_resume,
                          std::cout);
      return 0;
    }
    if (eval->parsed()) {
      ExperimentConfig cfg = resolve_config(eval_common);
      if (frames_opt->count()) cfg.eval_num_frames = eval_frames;
      if (frame_len_opt->count()) cfg.eval_frame_len_s = eval_frame_len;
      marginsv::cmd_evaluate(cfg, eval_corpus, eval_trials, eval_checkpoint,
                             eval_untrained, eval_noisy, std::cout);
      return 0;
    }
    if (check->parsed()) {
      if (const auto env = marginsv::env_seed_override()) check_seed = *env;
      const bool ok = marginsv::cmd_losscheck(
          check_seed, check_grad_batches, check_batch, check_fault, std::cout);
      return ok ? 0 : 2;
    }
    if (stats->parsed()) {
      marginsv::cmd_score_stats(stats_scores, stats_hist, std::cout);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
